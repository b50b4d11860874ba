"""Multi-cell massive-MIMO link-level simulator with soft pilot reuse and MBD precoding."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config  # noqa: E402
from .harness import AggregateReport, MetricsRecord, run_experiment, run_trial, simulate_trial  # noqa: E402

__all__ = [
    "AggregateReport",
    "MetricsRecord",
    "ScenarioConfig",
    "__version__",
    "load_config",
    "run_experiment",
    "run_trial",
    "simulate_trial",
]
