"""Config-driven experiment runner, CSV/JSON outputs and SVG plots."""

from .config import ExperimentConfig, bundled_config, load_config
from .runner import read_trajectory_csv, run_experiment

__all__ = ["ExperimentConfig", "bundled_config", "load_config", "read_trajectory_csv", "run_experiment"]
