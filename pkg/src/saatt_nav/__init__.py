"""Deterministic 2D benchmark for intent-aware wheelchair navigation among pedestrians."""

from .baselines import MethodKind
from .config import ConfigError, RunConfig, load_config
from .harness import TrialRecord, replay, run_batch, run_trial, transparency_log
from .scenarios import Layout, generate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Layout",
    "MethodKind",
    "RunConfig",
    "TrialRecord",
    "generate",
    "load_config",
    "replay",
    "run_batch",
    "run_trial",
    "transparency_log",
]
