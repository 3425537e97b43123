"""
Slow end-to-end checks that the model learns the synthetic task.

The run follows the reference recipe: MLM + ITM pretraining on the training
scenes, then fine-tuning at lr 8e-5, batch 8, dropout 0.1 for 4000 steps,
evaluating every 500 steps.
"""

import numpy as np
import pytest

from src.data.jsonl_io import SCENES_FILE, read_scenes
from src.services.pipeline_service import PipelineService
from src.training.config import EvalConfig
from src.training.metrics import evaluate
from src.training.pretrainer import run_pretraining
from src.training.train_log import best_record, select_final
from src.training.trainer import train

SEED = 5
MODEL = {'num_layers': 2, 'hidden_size': 64, 'num_heads': 4, 'dropout': 0.1}
FINE_TUNE = {'steps': 4000, 'batch_size': 8, 'eval_every': 500, 'lr': 8e-5}


@pytest.fixture(scope='module')
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp('data')
    PipelineService().generate_data(out, seed=SEED, overrides={'n_scenes': 625})
    return out


@pytest.fixture(scope='module')
def run(data_dir, tmp_path_factory):
    """Pretrain then fine-tune once; the tests below read the same run."""
    service = PipelineService()
    splits, vocab, feature_dim = service.load_data(data_dir)
    model = service.build_model(service.model_config(len(vocab), feature_dim, MODEL), SEED)
    scenes = [s for s in read_scenes(data_dir / SCENES_FILE) if s.split == 'train']
    pretrained = run_pretraining(model, scenes, vocab, service.pretrain_config(SEED))
    run_dir = tmp_path_factory.mktemp('run')
    result = train(model, splits, vocab, service.train_config(SEED, FINE_TUNE),
                   service.eval_config(), run_dir)
    return pretrained, result, run_dir


@pytest.mark.slow
class TestTrainability:
    """A 2-layer, 64-wide model separates targets from distractors."""

    def test_dataset_size(self, data_dir):
        splits, _, _ = PipelineService().load_data(data_dir)
        assert 1900 <= len(splits.train) <= 2100
        assert sum(s.label for s in splits.train) * 2 == len(splits.train)

    def test_fresh_model_near_chance(self, data_dir):
        service = PipelineService()
        splits, vocab, feature_dim = service.load_data(data_dir)
        model = service.build_model(service.model_config(len(vocab), feature_dim, MODEL), SEED)
        result = evaluate(model, splits.validation, vocab, EvalConfig())
        assert 0.35 <= result.accuracy <= 0.65

    def test_pretraining_stays_finite(self, run):
        pretrained, _, _ = run
        assert len(pretrained.losses) == 2000
        assert np.isfinite(pretrained.losses).all()

    def test_fine_tuning_reaches_high_validation_accuracy(self, run):
        _, result, _ = run
        assert len(result.log.records) == 8
        assert best_record(result.log).val_accuracy >= 0.95
        step, _ = select_final(result.log)
        assert step == best_record(result.log).step

    def test_training_loss_falls(self, run):
        _, result, _ = run
        losses = np.asarray(result.losses)
        assert losses.shape == (FINE_TUNE['steps'],)
        # step s is losses[s - 1]
        assert losses[2950:3000].mean() < losses[50:100].mean()

    def test_selected_checkpoint_reproduces_test_accuracy(self, run, data_dir):
        _, result, run_dir = run
        summary = result.summary()
        metrics = PipelineService().evaluate(run_dir / summary['checkpoint'], data_dir, 'test')
        assert metrics['accuracy'] == pytest.approx(summary['test_acc'], abs=1e-6)
