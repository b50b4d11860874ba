"""Pilot reception and correlation (least-squares) channel estimation.

Every estimate is the received pilot matrix correlated with one pilot row
and scaled by ``1 / sqrt(rho_p)``.  Under full reuse the estimate of a user
is the sum of the channels of all users sharing its row, plus noise; the
SPR plan removes the sharing for edge users of adjacent cells and lets a
BS also estimate the channels of its neighbours' edge users.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, complex_gaussian
from .config import ScenarioConfig
from .grouping import UserGrouping
from .pilots import PilotPlan
from .topology import NetworkRealization


@dataclass(frozen=True)
class NoiseModel:
    """Thermal noise variances in mW; uplink and downlink share bandwidth."""

    ul: float
    dl: float

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "NoiseModel":
        sigma2 = config.noise_power_mw
        return cls(ul=sigma2, dl=sigma2)


def receive_pilots(channels: ChannelSet, plan: PilotPlan, pilot_power: float, noise_power: float,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Received pilot matrices of all base stations, shape ``(L, M, tau)``.

    ``Y_i = sqrt(rho_p) * H_i @ Phi[rows] + N_i`` with ``N_i ~ CN(0, noise_power)``.
    """
    sent = plan.phi[plan.rows]
    Y = np.sqrt(pilot_power) * (channels.H @ sent)
    if noise_power > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_power > 0")
        Y = Y + complex_gaussian(rng, Y.shape, noise_power)
    return Y


def correlate(Y_bs: np.ndarray, plan: PilotPlan, rows, pilot_power: float) -> np.ndarray:
    """``Y_bs @ Phi[rows]^H / sqrt(rho_p)``: one estimated column per row."""
    rows = np.asarray(rows, dtype=int)
    return Y_bs @ plan.phi[rows].conj().T / np.sqrt(pilot_power)


def estimate_conventional(Y_bs: np.ndarray, plan: PilotPlan, network: NetworkRealization, cell: int,
                          pilot_power: float) -> np.ndarray:
    """``M x K_i`` estimate of the own-cell channel matrix, users in local order."""
    return correlate(Y_bs, plan, plan.rows[network.users_of(cell)], pilot_power)


def estimate_spr(Y_bs: np.ndarray, plan: PilotPlan, network: NetworkRealization, grouping: UserGrouping,
                 cell: int, pilot_power: float) -> tuple[np.ndarray, np.ndarray]:
    """Center and edge estimates ``(H_c, H_e)`` of the own cell under SPR."""
    center = grouping.center_users(network, cell)
    edge = grouping.edge_users(network, cell)
    return (correlate(Y_bs, plan, plan.rows[center], pilot_power),
            correlate(Y_bs, plan, plan.rows[edge], pilot_power))


@dataclass(frozen=True)
class IntercellEstimate:
    """Stacked inter-cell edge channels seen by one BS.

    ``A`` has one row per neighbouring edge user (transposed channel
    estimates, neighbours in index order); ``blocks[j]`` is the ``M x K_je``
    estimate for neighbour ``j``.
    """

    A: np.ndarray
    blocks: dict[int, np.ndarray]


def estimate_intercell(Y_bs: np.ndarray, plan: PilotPlan, network: NetworkRealization, grouping: UserGrouping,
                       cell: int, pilot_power: float) -> IntercellEstimate:
    """Estimate the edge-user channels of every lattice neighbour of ``cell``."""
    m = Y_bs.shape[0]
    blocks = {}
    for j in sorted(network.layout.neighbours[cell]):
        edge = grouping.edge_users(network, j)
        if len(edge):
            blocks[j] = correlate(Y_bs, plan, plan.rows[edge], pilot_power)
    if blocks:
        A = np.vstack([blocks[j].T for j in sorted(blocks)])
    else:
        A = np.zeros((0, m), dtype=complex)
    return IntercellEstimate(A=A, blocks=blocks)


@dataclass(frozen=True)
class EstimateSet:
    """Own-cell estimates (local user order) and, under SPR, inter-cell ones."""

    own: tuple[np.ndarray, ...]
    intercell: tuple[IntercellEstimate, ...] | None = None


def estimate_all(Y: np.ndarray, plan: PilotPlan, network: NetworkRealization, grouping: UserGrouping,
                 pilot_power: float, intercell: bool = False) -> EstimateSet:
    own = tuple(
        estimate_conventional(Y[i], plan, network, i, pilot_power) for i in range(network.n_cells)
    )
    inter = None
    if intercell:
        inter = tuple(
            estimate_intercell(Y[i], plan, network, grouping, i, pilot_power)
            for i in range(network.n_cells)
        )
    return EstimateSet(own=own, intercell=inter)


def normalized_errors(H_hat: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Per-column ``||h_hat - h||^2 / ||h||^2``."""
    return np.sum(np.abs(H_hat - H) ** 2, axis=0) / np.sum(np.abs(H) ** 2, axis=0)


def channel_mse(estimates: EstimateSet, channels: ChannelSet, grouping: UserGrouping,
                cells) -> tuple[float | None, float | None]:
    """Edge and center estimation MSE pooled over ``cells``.

    Returns ``(mse_edge, mse_center)``; a class without users yields ``None``.
    """
    network = channels.network
    errors, edge_flags = [], []
    for cell in cells:
        users = network.users_of(cell)
        errors.append(normalized_errors(estimates.own[cell], channels.H[cell][:, users]))
        edge_flags.append(grouping.is_edge[users])
    err = np.concatenate(errors) if errors else np.zeros(0)
    flag = np.concatenate(edge_flags) if edge_flags else np.zeros(0, bool)
    mse_e = float(err[flag].mean()) if flag.any() else None
    mse_c = float(err[~flag].mean()) if (~flag).any() else None
    return mse_e, mse_c
