"""Experiment configuration, Monte-Carlo orchestration and result emission."""

from .config import ConfigError, ExperimentConfig, parse_config
from .experiment import run_trace, run_trial, sweep
from .plot import PlotSpec, emit_svg
from .results import ResultTable, Row, emit_csv, read_csv

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "run_trace",
    "run_trial",
    "sweep",
    "PlotSpec",
    "emit_svg",
    "ResultTable",
    "Row",
    "emit_csv",
    "read_csv",
]
