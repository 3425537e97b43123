"""
Numerics: tensors, reverse-mode autodiff, seeded randomness and AdamW.
"""

from src.numerics.tensor import (
    Tape,
    Tensor,
    backward,
    checked_mode,
    default_dtype,
    get_default_dtype,
    set_checked,
    set_default_dtype,
)
from src.numerics.prng import PrngState
from src.numerics.optim import AdamW, AdamWHyper, AdamWState, adamw_step
from src.numerics.ops import INFER, TRAIN

__all__ = [
    "Tape",
    "Tensor",
    "backward",
    "checked_mode",
    "default_dtype",
    "get_default_dtype",
    "set_checked",
    "set_default_dtype",
    "PrngState",
    "AdamW",
    "AdamWHyper",
    "AdamWState",
    "adamw_step",
    "INFER",
    "TRAIN",
]
