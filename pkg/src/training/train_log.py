"""
Evaluation records of a training run and best-validation model selection.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from src.core.errors.exceptions import ValidationError
from src.data.jsonl_io import read_records, write_records
from src.training.metrics import ConfusionMatrix


@dataclass
class EvalRecord:
    """Metrics at one evaluation step."""

    step: int
    train_loss: float
    val_accuracy: float
    test_accuracy: float
    val_confusion: ConfusionMatrix
    test_confusion: ConfusionMatrix
    checkpoint: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'step': self.step,
            'train_loss': self.train_loss,
            'val_accuracy': self.val_accuracy,
            'test_accuracy': self.test_accuracy,
            'val_confusion': self.val_confusion.to_dict(),
            'test_confusion': self.test_confusion.to_dict(),
            'checkpoint': self.checkpoint,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvalRecord':
        return cls(
            int(data['step']),
            float(data['train_loss']),
            float(data['val_accuracy']),
            float(data['test_accuracy']),
            ConfusionMatrix.from_dict(data['val_confusion']),
            ConfusionMatrix.from_dict(data['test_confusion']),
            data.get('checkpoint'),
        )


@dataclass
class TrainLog:
    """Ordered evaluation records; steps are increasing multiples of ``eval_every``."""

    eval_every: int
    records: List[EvalRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: EvalRecord) -> None:
        """
        Raises:
            ValidationError: If the step is not a later multiple of eval_every
        """
        if record.step % self.eval_every != 0:
            raise ValidationError(
                "evaluation step is not a multiple of eval_every",
                {'step': record.step, 'eval_every': self.eval_every}
            )
        if self.records and record.step <= self.records[-1].step:
            raise ValidationError(
                "evaluation steps must increase",
                {'step': record.step, 'previous': self.records[-1].step}
            )
        self.records.append(record)

    def truncated(self, step: int) -> 'TrainLog':
        """Copy holding only records at or before ``step``."""
        return TrainLog(self.eval_every, [r for r in self.records if r.step <= step])

    def write(self, path: Union[str, Path]) -> None:
        write_records(path, (r.to_dict() for r in self.records))

    @classmethod
    def read(cls, path: Union[str, Path], eval_every: int) -> 'TrainLog':
        log = cls(eval_every)
        for record in read_records(path, EvalRecord.from_dict):
            log.append(record)
        return log

    def summary(self) -> Dict[str, Any]:
        """``{best_step, val_acc, test_acc, confusion, checkpoint}`` of the selected record."""
        best = best_record(self)
        return {
            'best_step': best.step,
            'val_acc': best.val_accuracy,
            'test_acc': best.test_accuracy,
            'confusion': best.test_confusion.to_dict(),
            'checkpoint': best.checkpoint,
        }


def best_record(log: TrainLog) -> EvalRecord:
    """
    Record with the highest validation accuracy, earliest on ties.

    Raises:
        ValidationError: If the log is empty
    """
    if not log.records:
        raise ValidationError("cannot select from an empty training log")
    best = log.records[0]
    for record in log.records[1:]:
        if record.val_accuracy > best.val_accuracy:
            best = record
    return best


def select_final(log: TrainLog) -> Tuple[int, float]:
    """(step, test accuracy) at the best validation step."""
    best = best_record(log)
    return best.step, best.test_accuracy
