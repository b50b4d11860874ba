"""Monte-Carlo orchestration, aggregation and CSV output.

Each trial draws a fresh user drop and shadowing, then
``inner_fading_draws`` independent small-scale fading realizations on top
of it.  Metrics are recorded for the measured cells only, while every
cell of the layout transmits and interferes.

Random streams are derived from ``(seed, trial_index)`` alone, so trials
can run in any order or in parallel without changing a single draw.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .channel import large_scale, small_scale
from .config import ScenarioConfig
from .downlink import dl_sinr, received_gains
from .errors import SimulationError
from .estimation import NoiseModel, estimate_all, normalized_errors, receive_pilots
from .grouping import group_for_config
from .pilots import assign_pilots
from .precoding import build_precoders
from .topology import build_layout, drop_users
from .uplink import achievable_rate, detector_rows, ul_sinr

log = logging.getLogger(__name__)

METRICS = ("ul_sinr", "ul_rate", "dl_sinr", "dl_rate", "mse")
CLASSES = ("center", "edge", "all")


@dataclass(frozen=True)
class MetricsRecord:
    """Per-user outcome of one trial (averaged over the inner fading draws)."""

    trial: int
    cell: int
    user: int
    user_class: str
    scheme: str
    detector: str
    precoder: str
    ul_sinr: float
    ul_rate: float
    dl_sinr: float
    dl_rate: float
    mse: float


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(MetricsRecord))


@dataclass(frozen=True)
class TrialOutcome:
    """Records of one trial plus diagnostics that are not part of the CSV.

    ``ul_limit`` and ``dl_limit`` hold, per record, the large-scale SINR
    ceiling set by users sharing the same pilot row in other cells:
    ``beta_iik^2 / sum beta_ijk^2`` (uplink, gains towards the serving BS)
    and ``beta_iik^2 / sum beta_jik^2`` (downlink, gains from the other BSs).
    ``inf`` when no other cell shares the row.
    """

    records: list[MetricsRecord]
    ul_limit: np.ndarray
    dl_limit: np.ndarray
    overhead_factor: float
    budgets: tuple[int, int, int]


def trial_streams(seed: int, trial_index: int, draws: int):
    """Independent generators: one for the drop, one per inner fading draw."""
    root = np.random.SeedSequence([int(seed), int(trial_index)])
    drop_seq, shadow_seq, draws_seq = root.spawn(3)
    per_draw = [tuple(np.random.default_rng(s) for s in d.spawn(2)) for d in draws_seq.spawn(draws)]
    return np.random.default_rng(drop_seq), np.random.default_rng(shadow_seq), per_draw


def _pilot_limits(beta: np.ndarray, network, rows: np.ndarray, users: np.ndarray):
    ul, dl = [], []
    for u in users:
        cell = network.user_cell[u]
        sharers = np.flatnonzero((rows == rows[u]) & (network.user_cell != cell))
        own = beta[cell, u] ** 2
        ul_den = np.sum(beta[cell, sharers] ** 2)
        dl_den = np.sum(beta[network.user_cell[sharers], u] ** 2)
        ul.append(own / ul_den if ul_den > 0 else np.inf)
        dl.append(own / dl_den if dl_den > 0 else np.inf)
    return np.array(ul), np.array(dl)


def simulate_trial(config: ScenarioConfig, trial_index: int) -> TrialOutcome:
    """Run one realization through the whole UL/DL chain."""
    try:
        return _simulate_trial(config, trial_index)
    except SimulationError as exc:
        raise type(exc)(f"trial {trial_index}: {exc}") from exc


def _simulate_trial(config: ScenarioConfig, trial_index: int) -> TrialOutcome:
    drop_rng, shadow_rng, draws = trial_streams(config.seed, trial_index, config.inner_fading_draws)
    layout = build_layout(config)
    network = drop_users(config, drop_rng, layout)
    fading = large_scale(network, config, shadow_rng)
    grouping = group_for_config(network, fading, config)
    plan = assign_pilots(config.scheme, network, grouping, config)
    noise = NoiseModel.from_config(config)
    mbd = config.precoder.endswith("-mbd")

    measured = np.concatenate([network.users_of(c) for c in config.measured_cells])
    n = len(measured)
    acc = {name: np.zeros(n) for name in ("ul_sinr", "ul_rate", "dl_sinr", "dl_rate", "mse")}

    for fading_rng, noise_rng in draws:
        channels = small_scale(network, fading, config, fading_rng)
        Y = receive_pilots(channels, plan, config.pilot_power_mw, noise.ul, noise_rng)
        estimates = estimate_all(Y, plan, network, grouping, config.pilot_power_mw, intercell=mbd)

        ul, err = [], []
        for cell in config.measured_cells:
            users = network.users_of(cell)
            D = detector_rows(estimates.own[cell], config.detector, cell)
            ul.append(ul_sinr(D, channels.H[cell], users, config.ul_power_mw, noise.ul))
            err.append(normalized_errors(estimates.own[cell], channels.H[cell][:, users]))
        ul = np.concatenate(ul)

        precoders = build_precoders(estimates, config.precoder)
        gains = received_gains(channels, precoders)
        dl = dl_sinr(channels, precoders, measured, config.dl_power_mw, noise.dl, gains)

        acc["ul_sinr"] += ul
        acc["dl_sinr"] += dl
        acc["ul_rate"] += achievable_rate(ul, plan.overhead_factor)
        acc["dl_rate"] += achievable_rate(dl, plan.overhead_factor)
        acc["mse"] += np.concatenate(err)

    draws_n = len(draws)
    acc = {k: v / draws_n for k, v in acc.items()}
    records = [
        MetricsRecord(
            trial=int(trial_index),
            cell=int(network.user_cell[u]),
            user=int(network.user_index[u]),
            user_class="edge" if grouping.is_edge[u] else "center",
            scheme=config.scheme,
            detector=config.detector,
            precoder=config.precoder,
            ul_sinr=float(acc["ul_sinr"][k]),
            ul_rate=float(acc["ul_rate"][k]),
            dl_sinr=float(acc["dl_sinr"][k]),
            dl_rate=float(acc["dl_rate"][k]),
            mse=float(acc["mse"][k]),
        )
        for k, u in enumerate(measured)
    ]
    ul_limit, dl_limit = _pilot_limits(fading.beta, network, plan.rows, measured)
    return TrialOutcome(
        records=records,
        ul_limit=ul_limit,
        dl_limit=dl_limit,
        overhead_factor=plan.overhead_factor,
        budgets=plan.budgets.as_tuple(),
    )


def run_trial(config: ScenarioConfig, trial_index: int) -> list[MetricsRecord]:
    return simulate_trial(config, trial_index).records


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and the fraction of samples at or below each."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return v, v
    uniq, last = np.unique(v[::-1], return_index=True)
    counts = v.size - last
    return uniq, counts / v.size


def column(records: Sequence[MetricsRecord], name: str, user_class: str = "all") -> np.ndarray:
    return np.array([
        getattr(r, name) for r in records if user_class == "all" or r.user_class == user_class
    ], dtype=float)


@dataclass
class AggregateReport:
    """Pooled statistics of an experiment.

    Attributes
    ----------
    config : ScenarioConfig
    records : list of MetricsRecord
        Ordered by (trial, cell, user).
    cdfs : dict
        ``(metric, class) -> (values, cumulative_fraction)``.
    ul_throughput, dl_throughput : float
        Mean over (trial, measured cell) of the summed per-user rates.
    mse_center, mse_edge : float or None
        Mean over trials of the per-trial class-average estimation error.
    """

    config: ScenarioConfig
    records: list[MetricsRecord]
    cdfs: dict
    ul_throughput: float
    dl_throughput: float
    mse_center: float | None
    mse_edge: float | None
    outcomes: list[TrialOutcome] = dataclasses.field(default_factory=list, repr=False)

    def values(self, metric: str, user_class: str = "all") -> np.ndarray:
        return column(self.records, metric, user_class)

    def median(self, metric: str, user_class: str = "all") -> float:
        return float(np.median(self.values(metric, user_class)))

    def summary(self) -> dict[str, float | int | None]:
        return {
            "trials": len({r.trial for r in self.records}),
            "records": len(self.records),
            "ul_cell_throughput": self.ul_throughput,
            "dl_cell_throughput": self.dl_throughput,
            "mse_center": self.mse_center,
            "mse_edge": self.mse_edge,
            "edge_fraction": float(np.mean([r.user_class == "edge" for r in self.records])) if self.records else None,
        }


def _cell_throughput(records: Sequence[MetricsRecord], name: str) -> float:
    sums: dict[tuple[int, int], float] = {}
    for r in records:
        key = (r.trial, r.cell)
        sums[key] = sums.get(key, 0.0) + getattr(r, name)
    return float(np.mean(list(sums.values()))) if sums else 0.0


def _class_mse(records: Sequence[MetricsRecord], user_class: str) -> float | None:
    per_trial: dict[int, list[float]] = {}
    for r in records:
        if r.user_class == user_class:
            per_trial.setdefault(r.trial, []).append(r.mse)
    if not per_trial:
        return None
    return float(np.mean([np.mean(v) for v in per_trial.values()]))


def aggregate(config: ScenarioConfig, records: Iterable[MetricsRecord],
              outcomes: list[TrialOutcome] | None = None) -> AggregateReport:
    records = sorted(records, key=lambda r: (r.trial, r.cell, r.user))
    cdfs = {}
    for metric in METRICS:
        for cls in CLASSES:
            cdfs[(metric, cls)] = empirical_cdf(column(records, metric, cls))
    return AggregateReport(
        config=config,
        records=records,
        cdfs=cdfs,
        ul_throughput=_cell_throughput(records, "ul_rate"),
        dl_throughput=_cell_throughput(records, "dl_rate"),
        mse_center=_class_mse(records, "center"),
        mse_edge=_class_mse(records, "edge"),
        outcomes=outcomes or [],
    )


def _simulate_star(args):
    return simulate_trial(*args)


def run_experiment(config: ScenarioConfig, trial_indices: Iterable[int] | None = None) -> AggregateReport:
    """Run the configured trials (in parallel when ``config.workers > 1``) and pool them."""
    indices = list(range(config.trials)) if trial_indices is None else [int(t) for t in trial_indices]
    if config.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_simulate_star, [(config, t) for t in indices], chunksize=4))
    else:
        outcomes = [simulate_trial(config, t) for t in indices]
    records = [r for o in outcomes for r in o.records]
    return aggregate(config, records, outcomes)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records: Sequence[MetricsRecord], path: str | Path) -> Path:
    path = Path(path)
    ordered = sorted(records, key=lambda r: (r.trial, r.cell, r.user))
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for r in ordered:
            writer.writerow([_fmt(getattr(r, f)) for f in RECORD_FIELDS])
    return path


def read_records_csv(path: str | Path) -> list[MetricsRecord]:
    types = {f.name: f.type for f in dataclasses.fields(MetricsRecord)}
    casts = {"int": int, "float": float, "str": str}
    out = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(MetricsRecord(**{k: casts[types[k]](v) for k, v in row.items()}))
    return out


def write_cdf_csv(report: AggregateReport, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "user_class", "value", "cumulative_fraction"])
        for (metric, cls), (vals, frac) in report.cdfs.items():
            for v, f in zip(vals, frac):
                writer.writerow([metric, cls, repr(float(v)), repr(float(f))])
    return path


def write_summary_csv(report: AggregateReport, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["quantity", "value"])
        for key, value in report.summary().items():
            writer.writerow([key, "" if value is None else _fmt(value)])
    return path


def write_metadata(config: ScenarioConfig, path: str | Path) -> Path:
    path = Path(path)
    meta = {
        "software": "sprmimo",
        "version": __version__,
        "config": config.to_dict(),
        "measured_cells": list(config.measured_cells),
        "interfering_cells": list(range(config.total_cells)),
        "noise_power_mw": config.noise_power_mw,
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def emit_csv(report: AggregateReport | Sequence[MetricsRecord], out_dir: str | Path) -> dict[str, Path]:
    """Write per-user records and, for a report, CDF/summary tables and metadata."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(report, AggregateReport):
        return {
            "records": write_records_csv(report.records, out / "records.csv"),
            "cdf": write_cdf_csv(report, out / "cdf.csv"),
            "summary": write_summary_csv(report, out / "summary.csv"),
            "metadata": write_metadata(report.config, out / "metadata.json"),
        }
    return {"records": write_records_csv(list(report), out / "records.csv")}
