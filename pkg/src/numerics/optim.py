"""
AdamW optimizer with decoupled weight decay and bias correction.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from src.core.errors.exceptions import DimensionError, ValidationError
from src.numerics.tensor import Tensor


@dataclass(frozen=True)
class AdamWHyper:
    """AdamW hyperparameters (defaults from the fine-tuning schedule)."""

    lr: float = 8e-5
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-8
    weight_decay: float = 0.01

    def __post_init__(self) -> None:
        if self.lr <= 0 or self.eps <= 0 or self.weight_decay < 0:
            raise ValidationError("invalid AdamW hyperparameters", {'hyper': self})
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValidationError("AdamW betas must be in [0, 1)", {'hyper': self})


@dataclass
class AdamWState:
    """First/second moments per parameter name and the global step count."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adamw_step(
    name: str,
    param: Tensor,
    grad: Optional[np.ndarray],
    state: AdamWState,
    hyper: AdamWHyper
) -> None:
    """
    Update one parameter in place for step ``state.t``.

    ``param <- param - lr * (m_hat / (sqrt(v_hat) + eps) + wd * param)``

    The caller increments ``state.t`` once per optimisation step before
    updating the parameters. A missing gradient is treated as zero.

    Raises:
        DimensionError: If stored moments do not match the parameter
    """
    if state.t < 1:
        raise ValidationError("state.t must be incremented before adamw_step")
    dtype = param.dtype
    g = np.zeros_like(param.data) if grad is None else np.asarray(grad, dtype=dtype)
    if g.shape != param.shape:
        raise DimensionError("gradient does not match parameter", g.shape, param.shape)

    m = state.m.get(name)
    v = state.v.get(name)
    if m is None:
        m = np.zeros_like(param.data)
        v = np.zeros_like(param.data)
    elif m.shape != param.shape or v.shape != param.shape:
        raise DimensionError("optimizer moments do not match parameter", m.shape, param.shape)

    b1, b2 = hyper.beta1, hyper.beta2
    m = (b1 * m + (1.0 - b1) * g).astype(dtype)
    v = (b2 * v + (1.0 - b2) * g * g).astype(dtype)
    m_hat = m / (1.0 - b1 ** state.t)
    v_hat = v / (1.0 - b2 ** state.t)
    update = m_hat / (np.sqrt(v_hat) + hyper.eps) + hyper.weight_decay * param.data
    param.data = (param.data - hyper.lr * update).astype(dtype)
    state.m[name] = m
    state.v[name] = v


class AdamW:
    """
    AdamW over a fixed, ordered set of named parameters.

    Example:
        >>> opt = AdamW(model.named_parameters())
        >>> opt.zero_grad(); tape.backward(loss); opt.step()
    """

    def __init__(
        self,
        params: Mapping[str, Tensor],
        hyper: Optional[AdamWHyper] = None,
        state: Optional[AdamWState] = None
    ):
        self.params: Dict[str, Tensor] = dict(params)
        self.hyper = hyper or AdamWHyper()
        self.state = state or AdamWState()

    def zero_grad(self) -> None:
        """Clear gradients of all managed parameters."""
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        """Apply one update to every parameter."""
        self.state.t += 1
        for name, p in self.params.items():
            adamw_step(name, p, p.grad, self.state, self.hyper)

    def ensure_state(self) -> None:
        """Materialise zero moments for every parameter (used before saving)."""
        for name, p in self.params.items():
            if name not in self.state.m:
                self.state.m[name] = np.zeros_like(p.data)
                self.state.v[name] = np.zeros_like(p.data)
