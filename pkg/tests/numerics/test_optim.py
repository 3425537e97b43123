"""
Unit tests for AdamW.
"""

import numpy as np
import pytest

from src.core.errors.exceptions import DimensionError, ValidationError
from src.numerics.optim import AdamW, AdamWHyper, AdamWState, adamw_step
from src.numerics.tensor import Tensor


def scalar(value):
    return Tensor([value], requires_grad=True, dtype='float64')


@pytest.mark.unit
class TestAdamW:
    """Single-step arithmetic and state handling."""

    def test_zero_grad_no_decay_is_noop(self):
        theta = scalar(1.5)
        state = AdamWState(t=1)
        adamw_step('theta', theta, np.zeros(1), state, AdamWHyper(weight_decay=0.0))
        assert theta.data[0] == 1.5

    def test_first_step_unit_gradient(self):
        theta = scalar(1.0)
        state = AdamWState(t=1)
        adamw_step('theta', theta, np.ones(1), state, AdamWHyper())
        assert theta.data[0] == pytest.approx(0.999919, abs=1e-6)

    def test_decay_only(self):
        theta = scalar(1.0)
        state = AdamWState(t=1)
        adamw_step('theta', theta, np.zeros(1), state, AdamWHyper())
        assert theta.data[0] == pytest.approx(1.0 - 8e-7, abs=1e-12)

    def test_step_requires_incremented_counter(self):
        with pytest.raises(ValidationError):
            adamw_step('theta', scalar(1.0), np.ones(1), AdamWState(), AdamWHyper())

    def test_moment_shape_mismatch(self):
        state = AdamWState(m={'theta': np.zeros(2)}, v={'theta': np.zeros(2)}, t=1)
        with pytest.raises(DimensionError):
            adamw_step('theta', scalar(1.0), np.ones(1), state, AdamWHyper())

    def test_invalid_betas(self):
        with pytest.raises(ValidationError):
            AdamWHyper(beta1=1.0)

    def test_optimizer_updates_all_parameters(self):
        a, b = scalar(1.0), scalar(2.0)
        opt = AdamW({'a': a, 'b': b}, AdamWHyper(lr=0.1, weight_decay=0.0))
        a.grad = np.ones(1)
        opt.step()
        assert opt.state.t == 1
        assert a.data[0] == pytest.approx(0.9)
        assert b.data[0] == 2.0
        opt.zero_grad()
        assert a.grad is None

    def test_ensure_state(self):
        a = scalar(1.0)
        opt = AdamW({'a': a})
        opt.ensure_state()
        np.testing.assert_array_equal(opt.state.m['a'], np.zeros(1))
