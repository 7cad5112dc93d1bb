"""Reproducible experiment runner: config parsing, trial dispatch, CSV and
manifest artifacts, and the command-line interface."""

from .config import ConfigError, EXPERIMENT_KINDS, config_hash, load_config, validate_config
from .runner import RunResult, run_experiment, sgd_trajectory, sweep_alpha

__all__ = [
    "ConfigError",
    "EXPERIMENT_KINDS",
    "config_hash",
    "load_config",
    "validate_config",
    "RunResult",
    "run_experiment",
    "sgd_trajectory",
    "sweep_alpha",
]
