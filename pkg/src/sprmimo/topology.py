"""Hexagonal multi-cell layout and uniform user drop.

Cells are flat-topped hexagons of circumradius ``R``; neighbouring base
stations sit ``sqrt(3) * R`` apart.  Cell 0 is at the origin and the rest
are numbered ring by ring, counter-clockwise.  Lattice positions are kept
in axial coordinates ``(q, r)`` with ``x = 1.5 R q`` and
``y = sqrt(3) R (r + q / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import CLUSTER_SIZE, ScenarioConfig
from .errors import ConfigurationError

SQRT3 = np.sqrt(3.0)

# Axial unit steps, counter-clockwise from 30 degrees.
_AXIAL_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class Layout:
    """Base-station geometry of the network.

    Attributes
    ----------
    positions : ndarray, shape (L, 2)
        Base-station coordinates in metres.
    axial : ndarray of int, shape (L, 2)
        Lattice coordinates of every cell.
    edge_class : ndarray of int, shape (L,)
        Reuse-7 class of every cell.  Adjacent cells always differ, and the
        seven cells of the central cluster carry classes 0..6 in index order.
    neighbours : tuple of tuple of int
        Indices of the lattice neighbours present in the layout, per cell.
    radius : float
        Cell circumradius in metres.
    """

    positions: np.ndarray
    axial: np.ndarray
    edge_class: np.ndarray
    neighbours: tuple[tuple[int, ...], ...]
    radius: float

    @property
    def n_cells(self) -> int:
        return len(self.positions)


def _ring(radius: int) -> list[tuple[int, int]]:
    q, r = (radius * _AXIAL_DIRECTIONS[0][0], radius * _AXIAL_DIRECTIONS[0][1])
    cells = []
    for side in range(6):
        dq, dr = _AXIAL_DIRECTIONS[(side + 2) % 6]
        for _ in range(radius):
            cells.append((q, r))
            q, r = q + dq, r + dr
    return cells


def _lattice_colour(q: int, r: int) -> int:
    # Neighbour steps map to the distinct non-zero residues {1,...,6}.
    return (q + 3 * r) % 7


@lru_cache(maxsize=None)
def _axial_cells(n_cells: int) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
    rings = {1: 0, 7: 1, 19: 2}[n_cells]
    cells = [(0, 0)]
    for radius in range(1, rings + 1):
        cells.extend(_ring(radius))
    cluster = cells[:CLUSTER_SIZE]
    relabel = {_lattice_colour(*c): k for k, c in enumerate(cluster)}
    if rings == 2:
        # Rotate the outer ring so that cell 8 falls in the class of cell 1.
        outer = cells[7:]
        shift = next(
            s for s in range(len(outer))
            if relabel[_lattice_colour(*outer[(s + 1) % len(outer)])] == 1
        )
        cells[7:] = outer[shift:] + outer[:shift]
    classes = tuple(relabel.get(_lattice_colour(*c), 0) for c in cells)
    return tuple(cells), classes


def build_layout(config: ScenarioConfig) -> Layout:
    """Base-station layout for 1, 7 or 19 cells."""
    n_cells = config.total_cells
    if n_cells not in (1, 7, 19):
        raise ConfigurationError(f"unsupported number of cells: {n_cells}")
    radius = float(config.cell_radius)
    cells, classes = _axial_cells(n_cells)
    axial = np.array(cells, dtype=int).reshape(-1, 2)
    q, r = axial[:, 0], axial[:, 1]
    positions = np.column_stack([1.5 * radius * q, SQRT3 * radius * (r + q / 2.0)])

    steps = set(_AXIAL_DIRECTIONS)
    neighbours = tuple(
        tuple(
            j for j in range(n_cells)
            if (cells[j][0] - cells[i][0], cells[j][1] - cells[i][1]) in steps
        )
        for i in range(n_cells)
    )
    return Layout(
        positions=positions,
        axial=axial,
        edge_class=np.array(classes, dtype=int),
        neighbours=neighbours,
        radius=radius,
    )


def in_hexagon(points: np.ndarray, radius: float, tol: float = 1e-9) -> np.ndarray:
    """Point-in-hexagon test for a flat-topped hexagon centred at the origin."""
    pts = np.atleast_2d(points)
    x, y = np.abs(pts[:, 0]), np.abs(pts[:, 1])
    slack = tol * radius
    return (y <= SQRT3 / 2 * radius + slack) & (SQRT3 * x + y <= SQRT3 * radius + slack)


@dataclass(frozen=True)
class NetworkRealization:
    """One random user drop.

    Users are stored flat and contiguous per cell: the users of cell ``j``
    occupy ``slice(offsets[j], offsets[j + 1])``.

    Attributes
    ----------
    layout : Layout
    users_per_cell : ndarray of int, shape (L,)
    user_positions : ndarray, shape (U, 2)
    user_cell : ndarray of int, shape (U,)
        Serving cell of every user.
    user_index : ndarray of int, shape (U,)
        Position of the user inside its cell.
    distances : ndarray, shape (L, U)
        Distance from every base station to every user, in metres.
    """

    layout: Layout
    users_per_cell: np.ndarray
    user_positions: np.ndarray
    user_cell: np.ndarray
    user_index: np.ndarray
    distances: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.layout.n_cells

    @property
    def n_users(self) -> int:
        return len(self.user_cell)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.users_per_cell)])

    def users_of(self, cell: int) -> np.ndarray:
        """Flat indices of the users served by ``cell``."""
        off = self.offsets
        return np.arange(off[cell], off[cell + 1])

    def serving_distances(self) -> np.ndarray:
        return self.distances[self.user_cell, np.arange(self.n_users)]


def sample_hexagon(rng: np.random.Generator, n: int, radius: float, min_distance: float) -> np.ndarray:
    """``n`` points uniform over the hexagon, at least ``min_distance`` from its centre."""
    out = np.empty((0, 2))
    half_height = SQRT3 / 2 * radius
    while len(out) < n:
        batch = max(2 * (n - len(out)), 8)
        cand = np.column_stack([
            rng.uniform(-radius, radius, batch),
            rng.uniform(-half_height, half_height, batch),
        ])
        keep = in_hexagon(cand, radius, tol=0.0) & (np.hypot(cand[:, 0], cand[:, 1]) >= min_distance)
        out = np.vstack([out, cand[keep]])
    return out[:n]


def drop_users(config: ScenarioConfig, rng: np.random.Generator, layout: Layout | None = None) -> NetworkRealization:
    """Draw the per-cell user counts and positions for one trial."""
    layout = layout if layout is not None else build_layout(config)
    counts = rng.integers(config.users_min, config.users_max + 1, size=layout.n_cells)
    pieces = [
        layout.positions[cell] + sample_hexagon(rng, int(k), layout.radius, config.min_user_distance)
        for cell, k in enumerate(counts)
    ]
    positions = np.vstack(pieces)
    user_cell = np.repeat(np.arange(layout.n_cells), counts)
    user_index = np.concatenate([np.arange(k) for k in counts])
    diff = positions[None, :, :] - layout.positions[:, None, :]
    distances = np.hypot(diff[..., 0], diff[..., 1])
    return NetworkRealization(
        layout=layout,
        users_per_cell=counts.astype(int),
        user_positions=positions,
        user_cell=user_cell,
        user_index=user_index,
        distances=distances,
    )
