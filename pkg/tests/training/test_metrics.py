"""
Unit tests for confusion counts, accuracy and evaluation.
"""

from fractions import Fraction

import numpy as np
import pytest

from src.core.errors.exceptions import ValidationError
from src.training.config import EvalConfig
from src.training.metrics import ConfusionMatrix, accuracy, accuracy_fraction, evaluate, predict


@pytest.fixture
def validation(small_dataset):
    _, splits = small_dataset
    return splits.validation


@pytest.mark.unit
class TestAccuracy:

    @pytest.mark.parametrize('counts,expected', [
        ((300, 10, 8, 294), Fraction(594, 612)),
        ((110, 4, 5, 113), Fraction(223, 232)),
    ])
    def test_exact(self, counts, expected):
        cm = ConfusionMatrix(*counts)
        assert accuracy_fraction(cm) == expected
        assert accuracy(cm) == pytest.approx(float(expected))

    def test_rounded_values(self):
        assert round(accuracy(ConfusionMatrix(300, 10, 8, 294)), 4) == 0.9706
        assert round(accuracy(ConfusionMatrix(110, 4, 5, 113)), 4) == 0.9612

    def test_empty(self):
        with pytest.raises(ValidationError):
            accuracy(ConfusionMatrix())

    def test_negative_counts(self):
        with pytest.raises(ValidationError):
            ConfusionMatrix(-1, 0, 0, 0)

    def test_add(self):
        cm = ConfusionMatrix()
        for predicted, label in [(1, 1), (1, 0), (0, 1), (0, 0), (0, 0)]:
            cm.add(predicted, label)
        assert cm.to_dict() == {'TP': 1, 'FP': 1, 'FN': 1, 'TN': 2}
        assert (cm + cm).total == 10
        assert ConfusionMatrix.from_dict(cm.to_dict()) == cm


@pytest.mark.unit
class TestEvaluate:

    def test_always_positive_threshold(self, tiny_model, validation, small_vocab):
        samples = [next(s for s in validation if s.label == 1),
                   next(s for s in validation if s.label == 0)]
        result = evaluate(tiny_model, samples, small_vocab, EvalConfig(threshold=0.0))
        assert result.confusion.to_dict() == {'TP': 1, 'FP': 1, 'FN': 0, 'TN': 0}
        assert result.accuracy == 0.5
        assert result.to_dict()['n'] == 2

    def test_counts_cover_every_sample(self, tiny_model, validation, small_vocab):
        result = evaluate(tiny_model, validation, small_vocab, EvalConfig(batch_size=3))
        assert result.confusion.total == len(validation)
        assert len(result.probabilities) == len(validation)

    def test_threads_keep_order(self, tiny_model, validation, small_vocab):
        serial = evaluate(tiny_model, validation, small_vocab, EvalConfig(batch_size=2))
        threaded = evaluate(tiny_model, validation, small_vocab,
                            EvalConfig(batch_size=2, max_workers=4))
        np.testing.assert_allclose(threaded.probabilities, serial.probabilities)
        assert threaded.confusion == serial.confusion

    def test_empty(self, tiny_model, small_vocab):
        with pytest.raises(ValidationError):
            evaluate(tiny_model, [], small_vocab)

    def test_predict_records(self, tiny_model, validation, small_vocab):
        records = predict(tiny_model, validation[:3], small_vocab)
        assert [r['id'] for r in records] == [s.sample_id for s in validation[:3]]
        for record in records:
            assert set(record) == {'id', 'p', 'predicted', 'label'}
            assert record['predicted'] == int(record['p'] >= 0.5)
        assert predict(tiny_model, [], small_vocab) == []
