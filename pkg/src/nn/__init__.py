"""
Neural network: parameters, embedders, transformer, model and pretraining.

Import the model from :mod:`src.nn.uniter`; this package root only exposes
the configuration and parameter helpers so that :mod:`src.data.batching` can
depend on them without a cycle.
"""

from src.nn.config import EARLY_FUSION, LATE_FUSION, ModelConfig
from src.nn.params import ModelParams, count_parameters, init_model_params, named_parameters

__all__ = [
    "EARLY_FUSION",
    "LATE_FUSION",
    "ModelConfig",
    "ModelParams",
    "count_parameters",
    "init_model_params",
    "named_parameters",
]
