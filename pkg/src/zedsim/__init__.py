"""Simulator for energy-information-aware zero-energy devices."""

from .config import ConfigError, ScenarioConfig, load, loads
from .engine import Metrics, aoi_update, run, sweep
from .presets import PRESETS, get_preset
from .rng import rng_stream

__all__ = ["ConfigError", "ScenarioConfig", "load", "loads", "Metrics", "aoi_update", "run",
           "sweep", "PRESETS", "get_preset", "rng_stream"]
__version__ = "0.1.0"
