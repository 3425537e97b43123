"""
Unit tests for checkpoint files.
"""

import numpy as np
import pytest

from src.core.errors.exceptions import (
    CheckpointError,
    CheckpointShapeError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)
from src.numerics.optim import AdamWState
from src.numerics.prng import PrngState
from src.nn.uniter import TargetDependentUniter
from src.training.checkpoint import (
    load_checkpoint,
    load_parameters,
    optimizer_for,
    restore_model,
    save_checkpoint,
)


@pytest.fixture
def optimizer_state(tiny_model):
    state = AdamWState(t=7)
    for name, tensor in tiny_model.named_parameters().items():
        state.m[name] = np.full(tensor.shape, 0.5, dtype=np.float32)
        state.v[name] = np.full(tensor.shape, 0.25, dtype=np.float32)
    return state


@pytest.fixture
def saved(tmp_path, tiny_model, optimizer_state):
    return save_checkpoint(tmp_path / 'model.ckpt', tiny_model, optimizer_state, step=42)


@pytest.mark.unit
class TestRoundTrip:

    def test_parameters_and_config(self, saved, tiny_model):
        checkpoint = load_checkpoint(saved)
        assert checkpoint.config == tiny_model.config
        assert checkpoint.step == 42
        restored = restore_model(checkpoint)
        for name, tensor in tiny_model.named_parameters().items():
            np.testing.assert_array_equal(restored.named_parameters()[name].data, tensor.data)

    def test_optimizer_state(self, saved, tiny_model):
        state = optimizer_for(tiny_model, load_checkpoint(saved))
        assert state.t == 7
        assert all((m == 0.5).all() for m in state.m.values())
        assert all((v == 0.25).all() for v in state.v.values())

    def test_without_optimizer(self, tmp_path, tiny_model):
        checkpoint = load_checkpoint(save_checkpoint(tmp_path / 'p.ckpt', tiny_model))
        assert checkpoint.optimizer is None
        with pytest.raises(CheckpointError):
            optimizer_for(tiny_model, checkpoint)

    def test_no_temporary_left_behind(self, saved):
        assert [p.name for p in saved.parent.iterdir()] == ['model.ckpt']


@pytest.mark.unit
class TestCorruptFiles:

    def test_missing(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / 'absent.ckpt')

    def test_bad_magic(self, tmp_path):
        path = tmp_path / 'bogus.ckpt'
        path.write_bytes(b'NOTACKPT' + b'\x00' * 16)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated(self, saved):
        data = saved.read_bytes()
        saved.write_bytes(data[:-5])
        with pytest.raises(CheckpointTruncatedError):
            load_checkpoint(saved)

    def test_trailing_bytes(self, saved):
        saved.write_bytes(saved.read_bytes() + b'\x00\x00\x00\x00')
        with pytest.raises(CheckpointTruncatedError):
            load_checkpoint(saved)

    def test_version(self, saved):
        data = saved.read_bytes()
        assert b'"format_version":1' in data
        saved.write_bytes(data.replace(b'"format_version":1', b'"format_version":9', 1))
        with pytest.raises(CheckpointVersionError):
            load_checkpoint(saved)


@pytest.mark.unit
class TestLoadParameters:

    def test_shape_mismatch(self, saved, tiny_config):
        wider = TargetDependentUniter(tiny_config.replace(hidden_size=32), rng=PrngState(0))
        with pytest.raises(CheckpointShapeError):
            load_parameters(wider, load_checkpoint(saved))

    def test_strict_requires_every_parameter(self, saved, tiny_config):
        late = TargetDependentUniter(tiny_config.replace(fusion='late'), rng=PrngState(0))
        checkpoint = load_checkpoint(saved)
        with pytest.raises(CheckpointShapeError):
            load_parameters(late, checkpoint, strict=True)
        loaded = load_parameters(late, checkpoint, strict=False)
        assert 'fusion.W' not in loaded
        assert 'head.W' in loaded
