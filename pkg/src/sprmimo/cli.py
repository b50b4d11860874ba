"""Command-line entry point.

Example::

    sprmimo --config scenario.yaml --scheme spr --precoder zf-mbd --trials 50 --out results/
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import DETECTORS, PRECODERS, SCHEMES, ScenarioConfig, config_from_mapping, load_config
from .errors import SimulationError
from .harness import emit_csv, run_experiment

# CLI flag -> ScenarioConfig field
_OVERRIDES = {
    "scheme": "scheme",
    "detector": "detector",
    "precoder": "precoder",
    "antennas": "antennas",
    "lam": "grouping_lambda",
    "trials": "trials",
    "seed": "seed",
    "inner_draws": "inner_fading_draws",
    "cells": "total_cells",
    "workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sprmimo",
        description="Monte-Carlo simulation of conventional, soft-pilot-reuse and orthogonal "
                    "pilot allocation in a multi-cell massive-MIMO network.",
    )
    p.add_argument("--config", help="flat YAML file with ScenarioConfig fields")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--detector", choices=DETECTORS)
    p.add_argument("--precoder", choices=PRECODERS)
    p.add_argument("--antennas", "-M", type=int, help="BS antennas M")
    p.add_argument("--lambda", dest="lam", type=float, help="grouping parameter")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--inner-draws", type=int, help="fading redraws per user drop")
    p.add_argument("--cells", type=int, choices=(1, 7, 19), help="total number of cells")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--out", default="results", help="output directory (default: %(default)s)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    base = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {
        field: getattr(args, flag) for flag, field in _OVERRIDES.items() if getattr(args, flag) is not None
    }
    return config_from_mapping(overrides, base=base)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        report = run_experiment(config)
        paths = emit_csv(report, args.out)
    except (SimulationError, OSError) as exc:
        print(f"sprmimo: error: {exc}", file=sys.stderr)
        return 2
    for key, value in report.summary().items():
        print(f"{key:>20}: {value}")
    print(f"{'written':>20}: {', '.join(str(p) for p in paths.values())}")
    return 0
