"""Downlink SINR and achievable rate under arbitrary per-cell precoders."""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .pilots import PilotPlan
from .precoding import PrecoderSet
from .uplink import achievable_rate


def received_gains(channels: ChannelSet, precoders: PrecoderSet) -> list[np.ndarray]:
    """``|h_{j,u}^T w_{j,k}|^2`` for every BS ``j``: a ``U x K_j`` array each."""
    return [np.abs(channels.H[j].T @ W) ** 2 for j, W in enumerate(precoders.W)]


def dl_sinr(channels: ChannelSet, precoders: PrecoderSet, users, dl_power: float, noise_power: float,
            gains: list[np.ndarray] | None = None) -> np.ndarray:
    """Instantaneous downlink SINR of the given (flat-indexed) users.

    Every precoding column of every cell other than the user's own stream
    counts as interference, intra-cell and inter-cell alike.
    """
    network = channels.network
    users = np.asarray(users, dtype=int)
    gains = received_gains(channels, precoders) if gains is None else gains
    total = sum(g[users].sum(axis=1) for g in gains)
    signal = np.array([gains[network.user_cell[u]][u, network.user_index[u]] for u in users])
    return dl_power * signal / (dl_power * (total - signal) + noise_power)


def dl_rate(sinr, plan: PilotPlan | float) -> np.ndarray:
    overhead = plan.overhead_factor if isinstance(plan, PilotPlan) else float(plan)
    return achievable_rate(sinr, overhead)
