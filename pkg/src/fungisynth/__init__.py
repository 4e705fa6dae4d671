"""Seeded synthetic generator of time-aligned fungal growth image sequences."""
from .config import ConfigError, SimulationConfig, load_config
from .dataset import generate_dataset, verify_dataset
from .lifecycle import Stage

__all__ = ["ConfigError", "SimulationConfig", "Stage", "generate_dataset", "load_config", "verify_dataset"]
__version__ = "0.1.0"
