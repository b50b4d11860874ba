"""Uplink detection, post-detection SINR and achievable rate."""

from __future__ import annotations

import logging

import numpy as np

from ._linalg import full_column_rank
from .errors import SingularityError
from .pilots import PilotPlan

log = logging.getLogger(__name__)


def detector_rows(H_hat: np.ndarray, detector: str, cell: int | None = None) -> np.ndarray:
    """Detection matrix (``K x M``) applied to the received uplink vector.

    ``mf`` returns ``H_hat^H``; ``zf`` the left pseudo-inverse
    ``(H_hat^H H_hat)^-1 H_hat^H``.
    """
    if detector == "mf":
        return H_hat.conj().T
    if detector == "zf":
        if not full_column_rank(H_hat):
            where = "" if cell is None else f" in cell {cell}"
            raise SingularityError(f"channel estimate{where} is rank deficient; ZF detection impossible")
        return np.linalg.pinv(H_hat)
    raise ValueError(f"unknown detector {detector!r}")


def ul_sinr(detection: np.ndarray, H_bs: np.ndarray, own_users, ul_power: float, noise_power: float) -> np.ndarray:
    """Instantaneous post-detection SINR of each detected user.

    Row ``k`` of ``detection`` targets user ``own_users[k]`` (a column of
    ``H_bs``); every other column of ``H_bs`` is interference.
    """
    own_users = np.asarray(own_users, dtype=int)
    gains = np.abs(detection @ H_bs) ** 2
    rows = np.arange(len(own_users))
    signal = gains[rows, own_users]
    interference = gains.sum(axis=1) - signal
    noise = noise_power * np.sum(np.abs(detection) ** 2, axis=1)
    return ul_power * signal / (ul_power * interference + noise)


def achievable_rate(sinr, overhead_factor: float) -> np.ndarray:
    """``(1 - overhead) * log2(1 + SINR)``, clamped at zero when pilots eat the block."""
    prefactor = 1.0 - overhead_factor
    if prefactor <= 0:
        log.warning("pilot overhead %.3f leaves no room for data; rate set to 0", overhead_factor)
        return np.zeros_like(np.asarray(sinr, dtype=float))
    return prefactor * np.log2(1.0 + np.asarray(sinr, dtype=float))


def ul_rate(sinr, plan: PilotPlan | float) -> np.ndarray:
    overhead = plan.overhead_factor if isinstance(plan, PilotPlan) else float(plan)
    return achievable_rate(sinr, overhead)
