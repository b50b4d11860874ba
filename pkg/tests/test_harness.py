import json

import numpy as np
import pytest

from sprmimo import __version__
from sprmimo.config import ScenarioConfig
from sprmimo.errors import SingularityError
from sprmimo.harness import (
    RECORD_FIELDS,
    MetricsRecord,
    aggregate,
    emit_csv,
    empirical_cdf,
    read_records_csv,
    run_experiment,
    run_trial,
    simulate_trial,
    trial_streams,
    write_records_csv,
)

FAST = ScenarioConfig(total_cells=7, antennas=32, users_min=4, users_max=6, trials=4, seed=3)


def _record(trial, cell, user, rate, cls="center"):
    return MetricsRecord(trial, cell, user, cls, "spr", "mf", "mf", 1.0, rate, 1.0, rate, 0.1)


def test_same_seed_byte_identical(tmp_path):
    a = write_records_csv(run_trial(FAST, 2), tmp_path / "a.csv").read_bytes()
    b = write_records_csv(run_trial(FAST, 2), tmp_path / "b.csv").read_bytes()
    assert a == b
    assert run_trial(FAST, 2) != run_trial(FAST, 3)


def test_trial_streams_independent_of_order():
    first = trial_streams(1, 5, 2)[0].random(3)
    trial_streams(1, 4, 2)
    np.testing.assert_array_equal(first, trial_streams(1, 5, 2)[0].random(3))


def test_conventional_still_reports_classes():
    records = run_trial(FAST.replace(scheme="conventional", grouping_lambda=0.5), 0)
    assert {r.user_class for r in records} == {"center", "edge"}
    assert {r.scheme for r in records} == {"conventional"}


def test_full_layout_spr_record_count():
    cfg = ScenarioConfig(trials=1, antennas=32, scheme="spr")
    records = run_trial(cfg, 0)
    assert len(records) >= 7 * cfg.users_min
    assert {r.cell for r in records} == set(range(7))
    assert all(np.isfinite([r.ul_sinr, r.ul_rate, r.dl_sinr, r.dl_rate, r.mse]).all() for r in records)


def test_one_record_per_measured_user():
    out = simulate_trial(FAST, 1)
    keys = [(r.cell, r.user) for r in out.records]
    assert len(keys) == len(set(keys))
    assert len(out.ul_limit) == len(out.records)


def test_inner_draws_average():
    cfg = FAST.replace(inner_fading_draws=3)
    recs = run_trial(cfg, 0)
    assert len(recs) == len(run_trial(FAST, 0))
    assert all(r.ul_rate >= 0 for r in recs)


def test_errors_carry_trial_index():
    cfg = ScenarioConfig(antennas=16, scheme="spr", precoder="zf-mbd", grouping_lambda=1.0, trials=1)
    with pytest.raises(SingularityError, match=r"trial 6"):
        simulate_trial(cfg, 6)


def test_constant_rates_step_cdf_and_throughput():
    records = [_record(t, c, u, 0.75) for t in range(3) for c in range(2) for u in range(4)]
    report = aggregate(FAST, records)
    values, frac = report.cdfs[("ul_rate", "all")]
    np.testing.assert_array_equal(values, [0.75])
    np.testing.assert_array_equal(frac, [1.0])
    assert report.ul_throughput == pytest.approx(4 * 0.75)
    assert report.mse_edge is None


def test_empirical_cdf_ties():
    v, f = empirical_cdf([3.0, 1.0, 3.0, 2.0])
    np.testing.assert_array_equal(v, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(f, [0.25, 0.5, 1.0])
    assert empirical_cdf([])[0].size == 0


def test_pooling_disjoint_halves_equals_full_run():
    full = run_experiment(FAST.replace(trials=6))
    halves = run_experiment(FAST, range(3)).records + run_experiment(FAST, range(3, 6)).records
    pooled = aggregate(FAST, halves[::-1])
    assert pooled.records == full.records
    assert pooled.ul_throughput == full.ul_throughput
    assert pooled.mse_center == full.mse_center


def test_parallel_matches_serial(tmp_path):
    serial = run_experiment(FAST)
    parallel = run_experiment(FAST.replace(workers=2))
    a = emit_csv(serial, tmp_path / "s")
    b = emit_csv(parallel, tmp_path / "p")
    for key in ("records", "cdf", "summary"):
        assert a[key].read_bytes() == b[key].read_bytes()


def test_more_trials_no_bias():
    # the mean over 40 trials must agree with the first 20 within Monte-Carlo error
    report = run_experiment(FAST.replace(trials=40))
    per_trial = {}
    for r in report.records:
        per_trial.setdefault(r.trial, []).append(r.ul_rate)
    means = np.array([np.mean(v) for _, v in sorted(per_trial.items())])
    half, full = means[:20].mean(), means.mean()
    assert abs(half - full) < 3 * means.std(ddof=1) / np.sqrt(20)


def test_edge_count_non_decreasing_over_lambda_sweep():
    counts = []
    for lam in (0.05, 0.1, 0.3, 0.5, 0.8, 1.0):
        rep = run_experiment(FAST.replace(scheme="spr", grouping_lambda=lam, trials=3))
        counts.append(sum(r.user_class == "edge" for r in rep.records))
    assert counts == sorted(counts)


def test_emit_empty_records(tmp_path):
    path = emit_csv([], tmp_path)["records"]
    assert path.read_text().splitlines() == [",".join(RECORD_FIELDS)]


def test_csv_round_trip(tmp_path):
    report = run_experiment(FAST)
    paths = emit_csv(report, tmp_path / "out")
    assert read_records_csv(paths["records"]) == report.records
    keys = [(r.trial, r.cell, r.user) for r in report.records]
    assert keys == sorted(keys)


def test_cdf_table_strictly_increasing(tmp_path):
    path = emit_csv(run_experiment(FAST), tmp_path)["cdf"]
    lines = path.read_text().splitlines()[1:]
    groups = {}
    for line in lines:
        metric, cls, value, frac = line.split(",")
        groups.setdefault((metric, cls), []).append((float(value), float(frac)))
    for rows in groups.values():
        vals, fracs = zip(*rows)
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(b >= a for a, b in zip(fracs, fracs[1:])) and fracs[-1] == pytest.approx(1.0)


def test_metadata_sidecar(tmp_path):
    meta = json.loads(emit_csv(run_experiment(FAST), tmp_path)["metadata"].read_text())
    assert meta["version"] == __version__
    assert meta["config"]["antennas"] == 32
    assert meta["measured_cells"] == list(range(7))


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_csv([], blocker / "sub")
