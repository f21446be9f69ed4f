"""Discrete-event simulator for TCP bufferbloat over intermittent mmWave links."""

from .config import ConfigError, ScenarioConfig, load_config
from .harness import Simulation, run_scenario
from .metrics import MetricsLog, emit_csv
from .scenarios import builtin_scenarios, get_scenario

__all__ = [
    "ConfigError",
    "MetricsLog",
    "ScenarioConfig",
    "Simulation",
    "builtin_scenarios",
    "emit_csv",
    "get_scenario",
    "load_config",
    "run_scenario",
]

__version__ = "0.1.0"
