"""
Confusion matrices, accuracy, evaluation and per-sample prediction.

Evaluation may score batches on a thread pool; the model is only read, and
``executor.map`` returns results in submission order, so counts and records
always follow sample order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence

import numpy as np

from src.core.errors.exceptions import ValidationError
from src.core.logging.logger import Logger
from src.data.batching import batches
from src.models.sample import Sample
from src.nn.uniter import TargetDependentUniter
from src.tokenizer.vocab import Vocab
from src.training.config import EvalConfig

logger = Logger.get_logger(__name__)


@dataclass
class ConfusionMatrix:
    """True/false positive/negative counts."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValidationError("confusion counts must be non-negative", self.to_dict())

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def add(self, predicted: int, label: int) -> None:
        """Count one (prediction, label) pair."""
        if predicted == 1:
            if label == 1:
                self.tp += 1
            else:
                self.fp += 1
        elif label == 1:
            self.fn += 1
        else:
            self.tn += 1

    def __add__(self, other: 'ConfusionMatrix') -> 'ConfusionMatrix':
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp,
            self.fn + other.fn, self.tn + other.tn,
        )

    def to_dict(self) -> Dict[str, int]:
        return {'TP': self.tp, 'FP': self.fp, 'FN': self.fn, 'TN': self.tn}

    @classmethod
    def from_dict(cls, data: Dict[str, int]) -> 'ConfusionMatrix':
        return cls(data['TP'], data['FP'], data['FN'], data['TN'])


def accuracy_fraction(cm: ConfusionMatrix) -> Fraction:
    """
    Exact (TP + TN) / (TP + FP + FN + TN).

    Raises:
        ValidationError: If the matrix is empty
    """
    if cm.total == 0:
        raise ValidationError("accuracy of an empty confusion matrix")
    return Fraction(cm.tp + cm.tn, cm.total)


def accuracy(cm: ConfusionMatrix) -> float:
    """(TP + TN) / (TP + FP + FN + TN) as a float."""
    return float(accuracy_fraction(cm))


@dataclass
class EvalResult:
    """Confusion matrix, accuracy and p(correct) per sample."""

    confusion: ConfusionMatrix
    accuracy: float
    probabilities: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {**self.confusion.to_dict(), 'accuracy': self.accuracy, 'n': self.confusion.total}


def _score(
    model: TargetDependentUniter,
    samples: Sequence[Sample],
    vocab: Vocab,
    config: EvalConfig
) -> np.ndarray:
    """p(correct) for every sample, in order."""
    chunks = batches(samples, vocab, model.config, config.batch_size)
    if config.max_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
            results = list(executor.map(model.predict_proba, chunks))
    else:
        results = [model.predict_proba(chunk) for chunk in chunks]
    return np.concatenate([r[:, 1] for r in results])


def evaluate(
    model: TargetDependentUniter,
    samples: Sequence[Sample],
    vocab: Vocab,
    config: EvalConfig = EvalConfig()
) -> EvalResult:
    """
    Score samples in inference mode and count outcomes.

    A sample is predicted positive iff p(correct) >= ``config.threshold``.

    Raises:
        ValidationError: If ``samples`` is empty
    """
    if not samples:
        raise ValidationError("cannot evaluate an empty sample set")
    probs = _score(model, samples, vocab, config)
    cm = ConfusionMatrix()
    for p, sample in zip(probs, samples):
        cm.add(int(p >= config.threshold), sample.label)
    return EvalResult(cm, accuracy(cm), [float(p) for p in probs])


def predict(
    model: TargetDependentUniter,
    samples: Sequence[Sample],
    vocab: Vocab,
    config: EvalConfig = EvalConfig()
) -> List[Dict[str, Any]]:
    """
    Per-sample records ``{id, p, predicted, label}``.

    ``p`` is p(correct); ``predicted`` applies the threshold.
    """
    if not samples:
        return []
    probs = _score(model, samples, vocab, config)
    return [
        {
            'id': sample.sample_id,
            'p': float(p),
            'predicted': int(p >= config.threshold),
            'label': sample.label,
        }
        for p, sample in zip(probs, samples)
    ]
