"""Experiment harness: configuration, seeded runner, rate fits, figures,
acceptance suite, and the command-line interface."""

from .config import ENV_PREFIX, METRIC_NAMES, ExperimentConfig, load_config
from .runner import (RunRecord, ResultStore, run_experiment, run_id_for,
                     seed_for, summary_csv)
from .ratefit import RateFit, fit_rate
from .figures import emit_figures
from .acceptance import acceptance

__all__ = [
    "ENV_PREFIX",
    "METRIC_NAMES",
    "ExperimentConfig",
    "load_config",
    "RunRecord",
    "ResultStore",
    "run_experiment",
    "run_id_for",
    "seed_for",
    "summary_csv",
    "RateFit",
    "fit_rate",
    "emit_figures",
    "acceptance",
]
