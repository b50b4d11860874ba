"""Scenario configuration.

Defaults reproduce the basic simulation parameters of the 19-cell network
(cell radius 500 m, path-loss exponent 3, 8 dB shadowing, 10 dBm user and
12 dBm BS power, 10 MHz at -174 dBm/Hz, pilot overhead 0.1).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigurationError

SCHEMES = ("conventional", "spr", "orthogonal")
DETECTORS = ("mf", "zf")
PRECODERS = ("mf", "zf", "mf-mbd", "zf-mbd")
SUPPORTED_CELL_COUNTS = (1, 7, 19)

# Cells sharing pilot resources and contributing to the pilot budgets.
CLUSTER_SIZE = 7


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of one Monte-Carlo experiment.

    Powers are given in dBm and exposed in mW through the ``*_mw``
    properties; every other quantity is in SI units.
    """

    total_cells: int = 19
    measured_cells: tuple[int, ...] | None = None
    antennas: int = 128
    users_min: int = 8
    users_max: int = 10
    cell_radius: float = 500.0
    pathloss_exponent: float = 3.0
    shadow_std_db: float = 8.0
    ul_power_dbm: float = 10.0
    pilot_power_dbm: float = 10.0
    dl_power_dbm: float = 12.0
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 10e6
    carrier_frequency_hz: float = 2e9
    overhead: float = 0.1
    grouping_lambda: float = 0.1
    min_user_distance: float = 30.0
    seed: int = 0
    trials: int = 100
    inner_fading_draws: int = 1
    scheme: str = "conventional"
    detector: str = "mf"
    precoder: str = "mf"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.measured_cells is None:
            object.__setattr__(
                self, "measured_cells", tuple(range(min(self.total_cells, CLUSTER_SIZE)))
            )
        else:
            object.__setattr__(self, "measured_cells", tuple(int(c) for c in self.measured_cells))
        self.validate()

    def validate(self) -> None:
        if self.total_cells not in SUPPORTED_CELL_COUNTS:
            raise ConfigurationError(
                f"total_cells must be one of {SUPPORTED_CELL_COUNTS}, got {self.total_cells}"
            )
        if not self.measured_cells:
            raise ConfigurationError("measured_cells must not be empty")
        bad = [c for c in self.measured_cells if not 0 <= c < self.total_cells]
        if bad:
            raise ConfigurationError(f"measured_cells out of range: {bad}")
        if not 0 < self.users_min <= self.users_max:
            raise ConfigurationError("need 0 < users_min <= users_max")
        if self.antennas < self.users_max:
            raise ConfigurationError("antennas must be >= users_max")
        if not self.cell_radius > self.min_user_distance > 0:
            raise ConfigurationError("need cell_radius > min_user_distance > 0")
        if self.pathloss_exponent <= 0:
            raise ConfigurationError("pathloss_exponent must be positive")
        if self.shadow_std_db < 0:
            raise ConfigurationError("shadow_std_db must be non-negative")
        if not 0 < self.overhead < 1:
            raise ConfigurationError("overhead must lie in (0, 1)")
        if self.grouping_lambda < 0:
            raise ConfigurationError("grouping_lambda must be non-negative")
        if self.bandwidth_hz <= 0:
            raise ConfigurationError("bandwidth_hz must be positive")
        if self.trials < 1 or self.inner_fading_draws < 1 or self.workers < 1:
            raise ConfigurationError("trials, inner_fading_draws and workers must be >= 1")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.detector not in DETECTORS:
            raise ConfigurationError(f"unknown detector {self.detector!r}; expected one of {DETECTORS}")
        if self.precoder not in PRECODERS:
            raise ConfigurationError(f"unknown precoder {self.precoder!r}; expected one of {PRECODERS}")
        if self.precoder.endswith("-mbd") and self.scheme != "spr":
            raise ConfigurationError(
                f"precoder {self.precoder!r} needs inter-cell edge estimates and requires scheme 'spr'"
            )

    @property
    def ul_power_mw(self) -> float:
        return dbm_to_mw(self.ul_power_dbm)

    @property
    def pilot_power_mw(self) -> float:
        return dbm_to_mw(self.pilot_power_dbm)

    @property
    def dl_power_mw(self) -> float:
        return dbm_to_mw(self.dl_power_dbm)

    @property
    def noise_power_mw(self) -> float:
        """Thermal noise power over the system bandwidth."""
        return dbm_to_mw(self.noise_density_dbm_hz + 10.0 * math.log10(self.bandwidth_hz))

    @property
    def cluster(self) -> tuple[int, ...]:
        """Indices of the cooperating cells used for pilot budgeting."""
        return tuple(range(min(self.total_cells, CLUSTER_SIZE)))

    def replace(self, **changes: Any) -> "ScenarioConfig":
        """Copy with ``changes`` applied; the measured set follows a new cell count."""
        if "total_cells" in changes and "measured_cells" not in changes:
            changes["measured_cells"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["measured_cells"] = list(self.measured_cells)
        return out


FIELD_NAMES = frozenset(f.name for f in fields(ScenarioConfig))


def config_from_mapping(values: Mapping[str, Any], base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a config from a flat mapping, rejecting unknown keys."""
    unknown = sorted(set(values) - FIELD_NAMES)
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
    base = base or ScenarioConfig()
    return base.replace(**dict(values))


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a flat YAML mapping of ``ScenarioConfig`` field names."""
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a flat key-value mapping")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigurationError(f"{path}: nested sections are not supported ({', '.join(nested)})")
    return config_from_mapping(data)


__all__ = [
    "CLUSTER_SIZE",
    "DETECTORS",
    "PRECODERS",
    "SCHEMES",
    "ScenarioConfig",
    "config_from_mapping",
    "dbm_to_mw",
    "load_config",
]
