import numpy as np
import pytest

from conftest import crandn, toy_network
from sprmimo.channel import ChannelSet, large_scale, small_scale
from sprmimo.config import ScenarioConfig
from sprmimo.estimation import (
    EstimateSet,
    NoiseModel,
    channel_mse,
    correlate,
    estimate_all,
    estimate_conventional,
    estimate_intercell,
    estimate_spr,
    normalized_errors,
    receive_pilots,
)
from sprmimo.grouping import UserGrouping, group_for_config, pilot_budgets
from sprmimo.pilots import assign_conventional, assign_orthogonal, assign_spr
from sprmimo.topology import drop_users


def make_grouping(net, is_edge, cluster=None):
    is_edge = np.asarray(is_edge, bool)
    edge = np.bincount(net.user_cell[is_edge], minlength=net.n_cells)
    center = net.users_per_cell - edge
    idx = list(range(net.n_cells)) if cluster is None else list(cluster)
    return UserGrouping(np.zeros(net.n_cells), is_edge, center, edge, pilot_budgets(center[idx], edge[idx]))


def make_plan(scheme, net, is_edge):
    cls = net.layout.edge_class
    if scheme == "conventional":
        return assign_conventional(net.user_cell, is_edge)
    if scheme == "spr":
        return assign_spr(net.user_cell, is_edge, cls)
    return assign_orthogonal(net.user_cell, cls, is_edge)


def test_noise_model_value():
    noise = NoiseModel.from_config(ScenarioConfig())
    assert noise.ul == noise.dl == pytest.approx(10 ** -10.4, rel=1e-12)


def test_single_cell_noise_free_exact(rng):
    net = toy_network([5])
    ch = ChannelSet(crandn(rng, 1, 16, 5), net)
    plan = assign_conventional(net.user_cell)
    Y = receive_pilots(ch, plan, 4.0, 0.0)
    np.testing.assert_allclose(Y[0], 2.0 * ch.H[0] @ plan.phi[plan.rows], atol=1e-12)
    np.testing.assert_allclose(estimate_conventional(Y[0], plan, net, 0, 4.0), ch.H[0], atol=1e-12)


def test_two_cells_full_sharing(rng):
    net = toy_network([3, 3])
    ch = ChannelSet(crandn(rng, 2, 8, 6), net)
    plan = assign_conventional(net.user_cell)
    Y = receive_pilots(ch, plan, 2.0, 0.0)
    np.testing.assert_allclose(Y[0], np.sqrt(2.0) * (ch.H[0][:, :3] + ch.H[0][:, 3:]) @ plan.phi, atol=1e-12)
    est = estimate_conventional(Y[0], plan, net, 0, 2.0)
    np.testing.assert_allclose(est, ch.H[0][:, :3] + ch.H[0][:, 3:], atol=1e-12)


def test_identity_pilots_scale_only(rng):
    net = toy_network([4])
    plan = assign_conventional(net.user_cell)
    plan = type(plan)(**{**plan.__dict__, "phi": np.eye(4, dtype=complex)})
    Y = crandn(rng, 8, 4)
    np.testing.assert_allclose(correlate(Y, plan, plan.rows, 9.0), Y / 3.0)


def test_requires_rng_with_noise(rng):
    net = toy_network([2])
    with pytest.raises(ValueError):
        receive_pilots(ChannelSet(crandn(rng, 1, 4, 2), net), assign_conventional(net.user_cell), 1.0, 1.0)


def test_noise_only_power():
    net = toy_network([3, 3])
    plan = assign_conventional(net.user_cell)
    ch = ChannelSet(np.zeros((2, 16, 6), complex), net)
    rng = np.random.default_rng(0)
    sigma2 = 3e-11
    power = np.mean([np.mean(np.abs(receive_pilots(ch, plan, 1.0, sigma2, rng)) ** 2) for _ in range(100)])
    assert power == pytest.approx(sigma2, rel=0.05)


@pytest.mark.parametrize("scheme", ["conventional", "spr", "orthogonal"])
@pytest.mark.parametrize("seed", range(4))
def test_noise_free_matches_contamination_sum(scheme, seed):
    # brute force: the estimate of user u at BS i is the sum of H_i over every
    # user that transmits the same pilot row
    rng = np.random.default_rng(seed)
    net = toy_network([4, 4, 4])
    is_edge = rng.random(12) < 0.4
    ch = ChannelSet(crandn(rng, 3, 8, 12), net)
    plan = make_plan(scheme, net, is_edge)
    Y = receive_pilots(ch, plan, 1.7, 0.0)
    for i in range(3):
        est = estimate_conventional(Y[i], plan, net, i, 1.7)
        for k, u in enumerate(net.users_of(i)):
            expected = sum(ch.H[i][:, v] for v in range(12) if plan.rows[v] == plan.rows[u])
            np.testing.assert_allclose(est[:, k], expected, atol=1e-12)


def test_spr_noise_free_edge_clean_and_center_contaminated(rng):
    net = toy_network([4, 5, 3, 4, 5, 3, 4])
    n = net.n_users
    is_edge = rng.random(n) < 0.5
    grouping = make_grouping(net, is_edge)
    ch = ChannelSet(crandn(rng, 7, 12, n), net)
    plan = assign_spr(net.user_cell, is_edge, net.layout.edge_class)
    Y = receive_pilots(ch, plan, 1.0, 0.0)
    for i in range(7):
        Hc, He = estimate_spr(Y[i], plan, net, grouping, i, 1.0)
        edge = grouping.edge_users(net, i)
        np.testing.assert_allclose(He, ch.H[i][:, edge], atol=1e-12)
        center = grouping.center_users(net, i)
        for k, u in enumerate(center):
            rank = k
            sharers = [grouping.center_users(net, j)[rank] for j in range(7)
                       if len(grouping.center_users(net, j)) > rank]
            np.testing.assert_allclose(Hc[:, k], ch.H[i][:, sharers].sum(axis=1), atol=1e-12)


def test_intercell_noise_free_and_shape(rng):
    net = toy_network([4, 5, 3, 4, 5, 3, 4])
    n = net.n_users
    is_edge = rng.random(n) < 0.5
    is_edge[net.users_of(3)] = False
    grouping = make_grouping(net, is_edge)
    ch = ChannelSet(crandn(rng, 7, 12, n), net)
    plan = assign_spr(net.user_cell, is_edge, net.layout.edge_class)
    Y = receive_pilots(ch, plan, 1.0, 0.0)
    for i in range(7):
        inter = estimate_intercell(Y[i], plan, net, grouping, i, 1.0)
        assert inter.A.shape == (grouping.budgets.edge - grouping.edge_counts[i], 12)
        assert 3 not in inter.blocks
        for j, block in inter.blocks.items():
            np.testing.assert_allclose(block, ch.H[i][:, grouping.edge_users(net, j)], atol=1e-12)
        stacked = np.vstack([inter.blocks[j].T for j in sorted(inter.blocks)])
        np.testing.assert_array_equal(inter.A, stacked)


def test_intercell_empty_without_neighbour_edges(rng):
    net = toy_network([3, 3])
    grouping = make_grouping(net, [True, False, False, False, False, False])
    plan = assign_spr(net.user_cell, grouping.is_edge, net.layout.edge_class)
    Y = receive_pilots(ChannelSet(crandn(rng, 2, 6, 6), net), plan, 1.0, 0.0)
    inter = estimate_intercell(Y[0], plan, net, grouping, 0, 1.0)
    assert inter.A.shape == (0, 6) and inter.blocks == {}


def test_unassigned_row_yields_noise_only(rng):
    net = toy_network([2, 3])
    ch = ChannelSet(crandn(rng, 2, 8, 5), net)
    plan = assign_conventional(net.user_cell)  # cell 0 leaves row 2 unused, cell 1 uses it
    plan = type(plan)(**{**plan.__dict__, "phi": np.eye(4, dtype=complex)})
    Y = receive_pilots(ch, plan, 1.0, 0.0)
    np.testing.assert_allclose(correlate(Y[0], plan, [3], 1.0), 0.0, atol=1e-14)


def test_noise_term_scales_with_pilot_power():
    net = toy_network([4])
    plan = assign_conventional(net.user_cell)
    ch = ChannelSet(np.zeros((1, 64, 4), complex), net)
    rng = np.random.default_rng(9)
    power = []
    for rho in (1.0, 2.0):
        est = [estimate_conventional(receive_pilots(ch, plan, rho, 1.0, rng)[0], plan, net, 0, rho)
               for _ in range(400)]
        power.append(np.mean(np.abs(est) ** 2))
    assert power[0] / power[1] == pytest.approx(2.0, rel=0.05)


def test_normalized_errors_examples(rng):
    H = crandn(rng, 10, 3)
    np.testing.assert_allclose(normalized_errors(H, H), 0.0)
    np.testing.assert_allclose(normalized_errors(2 * H, H), 1.0)


def test_channel_mse_reports_missing_class(rng):
    net = toy_network([3])
    H = crandn(rng, 1, 6, 3)
    ch = ChannelSet(H, net)
    est = EstimateSet(own=(2 * H[0],))
    mse_e, mse_c = channel_mse(est, ch, make_grouping(net, [False] * 3), [0])
    assert mse_e is None and mse_c == pytest.approx(1.0)


def test_estimate_all_full_network():
    cfg = ScenarioConfig(total_cells=7, antennas=32, scheme="spr", grouping_lambda=0.5)
    rng = np.random.default_rng(1)
    net = drop_users(cfg, rng)
    fading = large_scale(net, cfg, rng)
    grouping = group_for_config(net, fading, cfg)
    plan = assign_spr(net.user_cell, grouping.is_edge, net.layout.edge_class, cfg.cluster)
    ch = small_scale(net, fading, cfg, rng)
    Y = receive_pilots(ch, plan, cfg.pilot_power_mw, cfg.noise_power_mw, rng)
    est = estimate_all(Y, plan, net, grouping, cfg.pilot_power_mw, intercell=True)
    assert [e.shape for e in est.own] == [(32, k) for k in net.users_per_cell]
    assert len(est.intercell) == 7
    assert est.intercell[0].A.shape[0] == grouping.budgets.edge - grouping.edge_counts[0]
