"""Theorem-by-theorem Monte-Carlo experiments."""

from .config import (
    DEFAULT_TOLERANCES,
    THEOREMS,
    ConfigError,
    Experiment,
    Probe,
    load_config,
    parse_experiment,
)
from .report import CSV_HEADERS, ConvergenceReport
from .runners import (
    WORKERS_ENV,
    default_workers,
    fourier_dual,
    run_clt_kernel,
    run_clt_wot,
    run_experiment,
    run_impulse_clt,
    run_impulse_l1,
    run_impulse_slln,
    run_impulse_walk,
    run_l1_wot,
    run_random_walk,
    run_slln_kernel,
    run_slln_wot,
)

__all__ = [
    "CSV_HEADERS", "ConfigError", "ConvergenceReport", "DEFAULT_TOLERANCES", "Experiment",
    "Probe", "THEOREMS", "WORKERS_ENV", "default_workers", "fourier_dual", "load_config",
    "parse_experiment", "run_clt_kernel", "run_clt_wot", "run_experiment", "run_impulse_clt",
    "run_impulse_l1", "run_impulse_slln", "run_impulse_walk", "run_l1_wot", "run_random_walk",
    "run_slln_kernel", "run_slln_wot",
]
