"""
Unit tests for the full model.
"""

import math

import numpy as np
import pytest

from src.core.errors.exceptions import ValidationError
from src.data.batching import collate
from src.nn.config import ModelConfig
from src.nn.uniter import TargetDependentUniter, loss
from src.numerics.ops import TRAIN
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor
from src.training.diagnostics import parameter_audit


@pytest.fixture
def samples(small_dataset):
    _, splits = small_dataset
    return splits.train[:4]


@pytest.mark.unit
class TestForward:

    def test_probabilities(self, tiny_model, samples, small_vocab):
        prediction = tiny_model.forward(samples[0], small_vocab)
        assert prediction.p.shape == (2,)
        assert prediction.p.sum() == pytest.approx(1.0, abs=1e-6)
        assert 0.0 < prediction.correct < 1.0
        assert prediction.pooled.shape == (16,)

    def test_batch_matches_single(self, tiny_model, samples, small_vocab, tiny_config):
        probs = tiny_model.predict_proba(collate(samples, small_vocab, tiny_config))
        for row, sample in zip(probs, samples):
            np.testing.assert_allclose(row, tiny_model.forward(sample, small_vocab).p, atol=1e-5)

    def test_context_order_irrelevant(self, tiny_model, samples, small_vocab):
        sample = samples[0]
        reordered = sample.with_contexts(list(reversed(sample.contexts)))
        np.testing.assert_allclose(
            tiny_model.forward(sample, small_vocab).p,
            tiny_model.forward(reordered, small_vocab).p,
            atol=1e-5,
        )

    def test_depends_on_target(self, tiny_model, small_dataset, small_vocab):
        _, splits = small_dataset
        per_scene = {}
        for sample in splits.train:
            per_scene.setdefault(sample.sample_id.rsplit('-i', 1)[0], sample)
        chosen = list(per_scene.values())[:10]
        assert len(chosen) == 10

        changed = 0
        for sample in chosen:
            other = next(r for r in sample.contexts if r is not sample.target)
            first = tiny_model.forward(sample, small_vocab).p
            second = tiny_model.forward(sample.with_target(other), small_vocab).p
            changed += not np.allclose(first, second)
        assert changed >= 9

    def test_late_fusion(self, tiny_config, samples, small_vocab):
        model = TargetDependentUniter(tiny_config.replace(fusion='late'), rng=PrngState(0))
        assert model.forward(samples[0], small_vocab).p.sum() == pytest.approx(1.0, abs=1e-6)
        assert 'fusion.W' in model.named_parameters()

    def test_dropout_only_in_train_mode(self, tiny_model, samples, small_vocab, tiny_config):
        batch = collate(samples, small_vocab, tiny_config)
        inferred = [tiny_model.logits(batch).numpy() for _ in range(2)]
        np.testing.assert_array_equal(inferred[0], inferred[1])
        trained = tiny_model.logits(batch, TRAIN, PrngState(1)).numpy()
        assert not np.allclose(trained, inferred[0])

    def test_too_many_contexts(self, tiny_config, samples, small_vocab):
        model = TargetDependentUniter(tiny_config.replace(max_contexts=2), rng=PrngState(0))
        with pytest.raises(ValidationError):
            model.forward(samples[0], small_vocab)


@pytest.mark.unit
class TestLoss:

    def test_uniform_logits(self):
        value = loss(Tensor(np.zeros((8, 2))), [0, 1, 1, 0, 1, 0, 0, 1]).item()
        assert value == pytest.approx(8 * math.log(2))

    def test_label_count_checked(self):
        with pytest.raises(ValidationError):
            loss(Tensor(np.zeros((2, 2))), [1])


@pytest.mark.unit
class TestParameterCount:

    def test_fusion_variants_within_ten_percent(self):
        audit = parameter_audit(ModelConfig(vocab_size=64, feature_dim=19))
        assert audit.late > audit.early
        assert audit.relative_difference < 0.10
        assert set(audit.to_dict()) == {'early', 'late', 'relative_difference'}
