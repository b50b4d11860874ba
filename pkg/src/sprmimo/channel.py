"""Large-scale fading and Rayleigh small-scale fading.

The large-scale gain of the link between BS ``i`` and user ``u`` is
``beta = z / (r / R) ** alpha`` with log-normal shadowing ``z``.  It is a
relative gain normalised at the cell radius; no absolute path-loss
intercept is applied, so absolute SNRs are optimistic while every
comparison between schemes is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .topology import NetworkRealization


@dataclass(frozen=True)
class LargeScaleFading:
    """Per-link gains ``beta[i, u]`` and shadowing factors ``shadow[i, u]``."""

    beta: np.ndarray
    shadow: np.ndarray

    def serving(self, network: NetworkRealization) -> np.ndarray:
        """Gain of every user towards its own base station."""
        return self.beta[network.user_cell, np.arange(network.n_users)]


@dataclass(frozen=True)
class ChannelSet:
    """Complex channels of every user towards every base station.

    ``H[i]`` is the ``M x U`` matrix whose column ``u`` is the channel from
    user ``u`` to BS ``i``.  The same matrices serve uplink and downlink
    within a coherence block (TDD reciprocity).
    """

    H: np.ndarray
    network: NetworkRealization

    @property
    def antennas(self) -> int:
        return self.H.shape[1]

    def block(self, bs: int, cell: int) -> np.ndarray:
        """``M x K_cell`` channel matrix from the users of ``cell`` to BS ``bs``."""
        return self.H[bs][:, self.network.users_of(cell)]


def pathloss_gain(distance: np.ndarray, radius: float, exponent: float, shadow: np.ndarray | float = 1.0) -> np.ndarray:
    return np.asarray(shadow) / (np.asarray(distance) / radius) ** exponent


def large_scale(network: NetworkRealization, config: ScenarioConfig, rng: np.random.Generator) -> LargeScaleFading:
    """Draw i.i.d. log-normal shadowing per link and form the gains."""
    shadow_db = rng.normal(0.0, config.shadow_std_db, size=network.distances.shape)
    shadow = 10.0 ** (shadow_db / 10.0)
    beta = pathloss_gain(network.distances, config.cell_radius, config.pathloss_exponent, shadow)
    return LargeScaleFading(beta=beta, shadow=shadow)


def complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...], variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def small_scale(network: NetworkRealization, fading: LargeScaleFading, config: ScenarioConfig,
                rng: np.random.Generator, antennas: int | None = None) -> ChannelSet:
    """Draw ``g ~ CN(0, I_M)`` per link and scale it by ``sqrt(beta)``."""
    m = config.antennas if antennas is None else antennas
    g = complex_gaussian(rng, (network.n_cells, m, network.n_users))
    return ChannelSet(H=g * np.sqrt(fading.beta)[:, None, :], network=network)
