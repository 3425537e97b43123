"""
Central finite-difference verification of analytic gradients.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from src.numerics.prng import PrngState
from src.numerics.tensor import Tape, Tensor

RELATIVE_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    """Maximum relative error overall and per parameter."""

    max_relative_error: float = 0.0
    per_parameter: Dict[str, float] = field(default_factory=dict)
    checked_entries: int = 0

    def passed(self, tolerance: float = 1e-5) -> bool:
        return self.max_relative_error < tolerance


def relative_error(analytic: float, numeric: float) -> float:
    """``|a - n| / max(|a|, |n|, RELATIVE_FLOOR)``."""
    scale = max(abs(analytic), abs(numeric), RELATIVE_FLOOR)
    return abs(analytic - numeric) / scale


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    max_entries_per_tensor: Optional[int] = None,
    rng: Optional[PrngState] = None
) -> GradCheckReport:
    """
    Compare tape gradients with central differences.

    ``loss_fn`` must be deterministic (no train-mode dropout) and should be
    run with float64 parameters for the tolerance to be meaningful.

    Each entry's error is ``|a - n| / max(|a|, |n|, RELATIVE_FLOOR)``. The
    1e-4 floor makes the measure absolute for gradients smaller than that:
    a parameter whose true gradient is about zero (a bias feeding a softmax
    shift, a masked position) would otherwise report the relative size of
    its rounding noise. Near the floor a reported 1e-5 therefore bounds an
    absolute error of 1e-9 rather than a relative one.

    Args:
        loss_fn: Builds the scalar loss from the current parameter values
        params: Parameters to check, by name
        h: Finite-difference step
        max_entries_per_tensor: Check only this many seeded-random entries of
            each tensor (all entries when None)
        rng: Stream used to choose entries

    Returns:
        GradCheckReport
    """
    rng = rng or PrngState(0)
    for p in params.values():
        p.zero_grad()
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)

    report = GradCheckReport()
    for name, p in params.items():
        analytic = np.zeros_like(p.data) if p.grad is None else p.grad
        p.data = np.ascontiguousarray(p.data)
        flat = p.data.reshape(-1)
        count = flat.size
        if max_entries_per_tensor is not None and count > max_entries_per_tensor:
            entries = np.sort(rng.fork(name).choice(count, max_entries_per_tensor))
        else:
            entries = np.arange(count)

        worst = 0.0
        for idx in entries:
            original = flat[idx]
            flat[idx] = original + h
            plus = loss_fn().item()
            flat[idx] = original - h
            minus = loss_fn().item()
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * h)
            err = relative_error(float(analytic.reshape(-1)[idx]), numeric)
            worst = max(worst, err)
        report.per_parameter[name] = worst
        report.max_relative_error = max(report.max_relative_error, worst)
        report.checked_entries += len(entries)
    return report
