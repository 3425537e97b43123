"""
Unit tests for the evaluation log and final model selection.
"""

import pytest

from src.core.errors.exceptions import ValidationError
from src.training.metrics import ConfusionMatrix
from src.training.train_log import EvalRecord, TrainLog, best_record, select_final


def record(step, val, test=0.5):
    cm = ConfusionMatrix(1, 1, 1, 1)
    return EvalRecord(step, 0.3, val, test, cm, cm, f"checkpoints/step_{step:06d}.ckpt")


def log_of(vals, eval_every=2000):
    log = TrainLog(eval_every)
    for i, val in enumerate(vals, start=1):
        log.append(record(i * eval_every, val, test=0.1 * i))
    return log


@pytest.mark.unit
class TestSelectFinal:

    def test_earliest_best_wins_ties(self):
        step, test_acc = select_final(log_of([0.8, 0.9, 0.9]))
        assert step == 4000
        assert test_acc == pytest.approx(0.2)

    def test_single_record(self):
        assert select_final(log_of([0.1]))[0] == 2000

    def test_empty(self):
        with pytest.raises(ValidationError):
            best_record(TrainLog(10))

    def test_summary(self):
        summary = log_of([0.6, 0.7, 0.65]).summary()
        assert summary['best_step'] == 4000
        assert summary['val_acc'] == 0.7
        assert summary['confusion'] == {'TP': 1, 'FP': 1, 'FN': 1, 'TN': 1}
        assert summary['checkpoint'] == 'checkpoints/step_004000.ckpt'


@pytest.mark.unit
class TestTrainLog:

    def test_step_must_be_multiple(self):
        with pytest.raises(ValidationError):
            TrainLog(10).append(record(15, 0.5))

    def test_steps_must_increase(self):
        log = log_of([0.5, 0.6], eval_every=10)
        with pytest.raises(ValidationError):
            log.append(record(10, 0.7))

    def test_truncated(self):
        assert [r.step for r in log_of([0.5, 0.6, 0.7], 10).truncated(20).records] == [10, 20]

    def test_write_and_read(self, tmp_path):
        log = log_of([0.5, 0.75], 10)
        log.write(tmp_path / 'train_log.jsonl')
        loaded = TrainLog.read(tmp_path / 'train_log.jsonl', 10)
        assert [r.to_dict() for r in loaded.records] == [r.to_dict() for r in log.records]
