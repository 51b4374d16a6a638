"""Experiment layer: configs, averaging over orbits, plateau fits, file output."""
from .averaging import dicke_mean_entanglement, mean_entanglement
from .config import ConfigError, ExperimentConfig, PRESETS, load_config, validate
from .fitting import FitResult, fit_saturation
from .runner import run_experiment

__all__ = ["dicke_mean_entanglement", "mean_entanglement", "ConfigError", "ExperimentConfig",
           "PRESETS", "load_config", "validate", "FitResult", "fit_saturation", "run_experiment"]
