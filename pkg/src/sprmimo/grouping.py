"""Center/edge user classification and pilot budgets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LargeScaleFading
from .config import ScenarioConfig
from .topology import NetworkRealization


def compute_threshold(beta_serving: np.ndarray, lam: float) -> float:
    """Grouping threshold ``(lam / K) * sum(beta ** 2)`` for one cell."""
    b = np.asarray(beta_serving, dtype=float)
    if b.size == 0:
        raise ValueError("a cell needs at least one user")
    return float(lam * np.mean(b ** 2))


def classify(beta_serving: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a cell's users into (center, edge) local index arrays.

    A user is a center user only if ``beta ** 2`` strictly exceeds the
    threshold; ties go to the edge group.
    """
    b2 = np.asarray(beta_serving, dtype=float) ** 2
    center = b2 > threshold
    return np.flatnonzero(center), np.flatnonzero(~center)


@dataclass(frozen=True)
class PilotBudgets:
    """Pilot sequence counts for the three allocation schemes."""

    conventional: int
    spr: int
    orthogonal: int
    center: int
    edge: int

    def as_tuple(self) -> tuple[int, int, int]:
        return self.conventional, self.spr, self.orthogonal


def pilot_budgets(center_counts, edge_counts) -> PilotBudgets:
    """Budgets over a set of cooperating cells.

    ``K_CS = max K_i``, ``K_SPR = max K_ic + sum K_ie`` and ``K_OS = sum K_i``.
    """
    kc = np.asarray(center_counts, dtype=int)
    ke = np.asarray(edge_counts, dtype=int)
    totals = kc + ke
    k_center = int(kc.max(initial=0))
    k_edge = int(ke.sum())
    return PilotBudgets(
        conventional=int(totals.max(initial=0)),
        spr=k_center + k_edge,
        orthogonal=int(totals.sum()),
        center=k_center,
        edge=k_edge,
    )


@dataclass(frozen=True)
class UserGrouping:
    """Grouping of every user in the network.

    Attributes
    ----------
    thresholds : ndarray, shape (L,)
    is_edge : ndarray of bool, shape (U,)
    center_counts, edge_counts : ndarray of int, shape (L,)
    budgets : PilotBudgets
        Computed over the cooperating cluster only.
    """

    thresholds: np.ndarray
    is_edge: np.ndarray
    center_counts: np.ndarray
    edge_counts: np.ndarray
    budgets: PilotBudgets

    def center_users(self, network: NetworkRealization, cell: int) -> np.ndarray:
        users = network.users_of(cell)
        return users[~self.is_edge[users]]

    def edge_users(self, network: NetworkRealization, cell: int) -> np.ndarray:
        users = network.users_of(cell)
        return users[self.is_edge[users]]


def group_users(network: NetworkRealization, fading: LargeScaleFading, lam: float,
                cluster: tuple[int, ...]) -> UserGrouping:
    """Classify the users of every cell and size the pilot budgets over ``cluster``."""
    serving = fading.serving(network)
    thresholds = np.empty(network.n_cells)
    is_edge = np.zeros(network.n_users, dtype=bool)
    for cell in range(network.n_cells):
        users = network.users_of(cell)
        thresholds[cell] = compute_threshold(serving[users], lam)
        _, edge = classify(serving[users], thresholds[cell])
        is_edge[users[edge]] = True
    edge_counts = np.bincount(network.user_cell[is_edge], minlength=network.n_cells)
    center_counts = network.users_per_cell - edge_counts
    idx = list(cluster)
    return UserGrouping(
        thresholds=thresholds,
        is_edge=is_edge,
        center_counts=center_counts,
        edge_counts=edge_counts,
        budgets=pilot_budgets(center_counts[idx], edge_counts[idx]),
    )


def group_for_config(network: NetworkRealization, fading: LargeScaleFading, config: ScenarioConfig) -> UserGrouping:
    return group_users(network, fading, config.grouping_lambda, config.cluster)
