import numpy as np
import pytest

from sprmimo.topology import Layout, NetworkRealization


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def toy_network(counts, n_cells=None, edge_class=None, neighbours=None, radius=500.0):
    """Hand-built realization with ``counts[j]`` users in cell ``j``.

    Geometry is irrelevant for the linear-algebra tests that use it, so all
    positions sit at the origin and distances are filled with the radius.
    """
    counts = np.asarray(counts, dtype=int)
    n_cells = len(counts) if n_cells is None else n_cells
    if edge_class is None:
        edge_class = np.arange(n_cells) % 7
    if neighbours is None:
        neighbours = tuple(tuple(j for j in range(n_cells) if j != i) for i in range(n_cells))
    layout = Layout(
        positions=np.zeros((n_cells, 2)),
        axial=np.zeros((n_cells, 2), dtype=int),
        edge_class=np.asarray(edge_class, dtype=int),
        neighbours=neighbours,
        radius=radius,
    )
    n = int(counts.sum())
    return NetworkRealization(
        layout=layout,
        users_per_cell=counts,
        user_positions=np.zeros((n, 2)),
        user_cell=np.repeat(np.arange(n_cells), counts),
        user_index=np.concatenate([np.arange(k) for k in counts]),
        distances=np.full((n_cells, n), radius),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Filled by the acceptance module, echoed once at the end of the session.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
