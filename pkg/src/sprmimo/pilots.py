"""Orthonormal pilot families and per-user pilot assignment.

Three allocations are supported:

* ``conventional``: the ``k``-th user of every cell (center users first)
  sends row ``k`` (reuse 1).
* ``spr``: center users reuse a common center block in every cell; edge
  users get rows from the block of their cell's reuse-7 class, so edge
  users of adjacent cells never share a row.
* ``orthogonal``: every user of the cooperating cluster gets its own row;
  cells outside the cluster reuse the block of their class.

Rows are drawn from a unitary DFT matrix, which is exactly orthonormal
and needs no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grouping import PilotBudgets, pilot_budgets


def build_pilot_matrix(n_sequences: int, tau: int | None = None) -> np.ndarray:
    """First ``n_sequences`` rows of the unitary ``tau x tau`` DFT matrix.

    The rows satisfy ``Phi @ Phi.conj().T == I``.
    """
    tau = n_sequences if tau is None else tau
    if n_sequences < 0 or tau < 1:
        raise ConfigurationError("pilot length must be positive")
    if tau < n_sequences:
        raise ConfigurationError(f"pilot length {tau} cannot hold {n_sequences} orthogonal sequences")
    k = np.arange(n_sequences)[:, None]
    t = np.arange(tau)[None, :]
    return np.exp(-2j * np.pi * k * t / tau) / np.sqrt(tau)


@dataclass(frozen=True)
class PilotPlan:
    """Pilot matrix and the row sent by every user.

    Attributes
    ----------
    scheme : str
    phi : ndarray, shape (tau, tau)
        Orthonormal rows; ``phi[rows[u]]`` is the sequence of user ``u``.
    rows : ndarray of int, shape (U,)
    budgets : PilotBudgets
        Budgets over the cooperating cluster; they set the rate overhead.
    overhead_factor : float
        Fraction of the coherence block spent on pilots.
    center_rows : ndarray of int
        Rows of the shared center block (SPR only, else empty).
    class_blocks : tuple of ndarray
        Rows of each reuse-7 block (SPR and orthogonal).
    """

    scheme: str
    phi: np.ndarray
    rows: np.ndarray
    budgets: PilotBudgets
    overhead_factor: float
    center_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    class_blocks: tuple[np.ndarray, ...] = ()

    @property
    def tau(self) -> int:
        return self.phi.shape[1]

    @property
    def rate_prefactor(self) -> float:
        return 1.0 - self.overhead_factor


def _local_indices(user_cell: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Rank of each masked user among the masked users of its own cell."""
    out = np.full(len(user_cell), -1, dtype=int)
    for cell in np.unique(user_cell):
        sel = np.flatnonzero((user_cell == cell) & mask)
        out[sel] = np.arange(len(sel))
    return out


def _budgets(user_cell, is_edge, cluster) -> PilotBudgets:
    n_cells = int(user_cell.max()) + 1 if len(user_cell) else 0
    edge = np.bincount(user_cell[is_edge], minlength=n_cells)
    total = np.bincount(user_cell, minlength=n_cells)
    idx = list(cluster)
    return pilot_budgets(total[idx] - edge[idx], edge[idx])


def _scaled_overhead(mu: float, used: int, reference: int) -> float:
    return mu * used / reference if reference > 0 else mu


def center_first_order(user_cell, is_edge) -> np.ndarray:
    """Index of each user within its cell when center users are listed first."""
    user_cell = np.asarray(user_cell, dtype=int)
    is_edge = np.asarray(is_edge, dtype=bool)
    n_cells = int(user_cell.max()) + 1 if len(user_cell) else 0
    n_center = np.bincount(user_cell[~is_edge], minlength=n_cells)
    order = _local_indices(user_cell, ~is_edge)
    order[is_edge] = n_center[user_cell[is_edge]] + _local_indices(user_cell, is_edge)[is_edge]
    return order


def assign_conventional(user_cell, is_edge=None, cluster=None, mu: float = 0.1) -> PilotPlan:
    """Full reuse: the ``k``-th user of every cell sends row ``k``.

    Users are counted center-first, so center users of different cells
    share rows with each other exactly as under SPR.
    """
    user_cell = np.asarray(user_cell, dtype=int)
    is_edge = np.zeros(len(user_cell), bool) if is_edge is None else np.asarray(is_edge, bool)
    cluster = tuple(np.unique(user_cell)) if cluster is None else tuple(cluster)
    rows = center_first_order(user_cell, is_edge)
    tau = int(rows.max()) + 1 if len(rows) else 1
    return PilotPlan(
        scheme="conventional",
        phi=build_pilot_matrix(tau),
        rows=rows,
        budgets=_budgets(user_cell, is_edge, cluster),
        overhead_factor=mu,
    )


def _class_blocks(sizes: np.ndarray, start: int) -> tuple[np.ndarray, ...]:
    bounds = start + np.concatenate([[0], np.cumsum(sizes)])
    return tuple(np.arange(bounds[c], bounds[c + 1]) for c in range(len(sizes)))


def assign_spr(user_cell, is_edge, edge_class, cluster=None, mu: float = 0.1) -> PilotPlan:
    """Soft pilot reuse.

    Center users take the first ``K_ic`` rows of the center block, which is
    sized for the largest center group in the network.  Each reuse class
    owns an edge block sized for the largest edge group among its cells;
    a cell's edge users take the leading rows of their class block.
    """
    user_cell = np.asarray(user_cell, dtype=int)
    is_edge = np.asarray(is_edge, dtype=bool)
    edge_class = np.asarray(edge_class, dtype=int)
    cluster = tuple(np.unique(user_cell)) if cluster is None else tuple(cluster)
    n_cells = len(edge_class)

    edge_counts = np.bincount(user_cell[is_edge], minlength=n_cells)
    center_counts = np.bincount(user_cell[~is_edge], minlength=n_cells)
    n_center = int(center_counts.max(initial=0))
    n_classes = int(edge_class.max()) + 1
    block_sizes = np.array([
        edge_counts[edge_class == c].max(initial=0) for c in range(n_classes)
    ], dtype=int)
    blocks = _class_blocks(block_sizes, n_center)

    rows = _local_indices(user_cell, ~is_edge)
    edge_rank = _local_indices(user_cell, is_edge)
    for u in np.flatnonzero(is_edge):
        block = blocks[edge_class[user_cell[u]]]
        if edge_rank[u] >= len(block):
            raise ConfigurationError(
                f"edge block {edge_class[user_cell[u]]} too small for cell {user_cell[u]}"
            )
        rows[u] = block[edge_rank[u]]

    tau = max(n_center + int(block_sizes.sum()), 1)
    budgets = _budgets(user_cell, is_edge, cluster)
    return PilotPlan(
        scheme="spr",
        phi=build_pilot_matrix(tau),
        rows=rows,
        budgets=budgets,
        overhead_factor=_scaled_overhead(mu, budgets.spr, budgets.conventional),
        center_rows=np.arange(n_center),
        class_blocks=blocks,
    )


def assign_orthogonal(user_cell, edge_class, is_edge=None, cluster=None, mu: float = 0.1) -> PilotPlan:
    """Disjoint pilot blocks per reuse class; unique rows inside the cluster."""
    user_cell = np.asarray(user_cell, dtype=int)
    edge_class = np.asarray(edge_class, dtype=int)
    is_edge = np.zeros(len(user_cell), bool) if is_edge is None else np.asarray(is_edge, bool)
    cluster = tuple(np.unique(user_cell)) if cluster is None else tuple(cluster)
    n_cells = len(edge_class)

    counts = np.bincount(user_cell, minlength=n_cells)
    n_classes = int(edge_class.max()) + 1
    block_sizes = np.array([counts[edge_class == c].max(initial=0) for c in range(n_classes)], dtype=int)
    blocks = _class_blocks(block_sizes, 0)
    local = _local_indices(user_cell, np.ones(len(user_cell), bool))
    rows = np.array([blocks[edge_class[c]][k] for c, k in zip(user_cell, local)], dtype=int)

    budgets = _budgets(user_cell, is_edge, cluster)
    return PilotPlan(
        scheme="orthogonal",
        phi=build_pilot_matrix(max(int(block_sizes.sum()), 1)),
        rows=rows,
        budgets=budgets,
        overhead_factor=_scaled_overhead(mu, budgets.orthogonal, budgets.conventional),
        class_blocks=blocks,
    )


def assign_pilots(scheme: str, network, grouping, config) -> PilotPlan:
    """Dispatch on the configured scheme for a full network realization."""
    args = dict(cluster=config.cluster, mu=config.overhead)
    cls = network.layout.edge_class
    if scheme == "conventional":
        return assign_conventional(network.user_cell, grouping.is_edge, **args)
    if scheme == "spr":
        return assign_spr(network.user_cell, grouping.is_edge, cls, **args)
    if scheme == "orthogonal":
        return assign_orthogonal(network.user_cell, cls, grouping.is_edge, **args)
    raise ConfigurationError(f"unknown scheme {scheme!r}")
