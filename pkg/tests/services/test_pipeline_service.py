"""
Unit tests for PipelineService.
"""

import json

import pytest

from src.core.errors.exceptions import CheckpointError, ConfigurationError, DataError, ValidationError
from src.data.jsonl_io import META_FILE, SCENES_FILE, VOCAB_FILE, read_samples
from src.services.pipeline_service import (
    ABLATION_VARIANTS,
    PRETRAINED_FILE,
    RUN_CONFIG_FILE,
    PipelineService,
)

TINY_MODEL = {'num_layers': 2, 'hidden_size': 16, 'num_heads': 2}
SHORT_RUN = {'steps': 2, 'eval_every': 2, 'batch_size': 4}


@pytest.fixture(scope='module')
def service():
    return PipelineService()


@pytest.fixture(scope='module')
def data_dir(tmp_path_factory):
    """A generated 20-scene data directory shared by the module."""
    out = tmp_path_factory.mktemp('data')
    PipelineService().generate_data(out, seed=1, overrides={'n_scenes': 20})
    return out


@pytest.fixture(scope='module')
def run_dir(tmp_path_factory, data_dir):
    """A finished two-step fine-tuning run."""
    out = tmp_path_factory.mktemp('run')
    PipelineService().train(data_dir, out, seed=0, model_overrides=TINY_MODEL,
                            train_overrides=SHORT_RUN)
    return out


@pytest.mark.unit
class TestConfiguration:
    """Precedence of overrides, file config and YAML."""

    def test_model_config_from_yaml(self, service):
        config = service.model_config(50, 19)
        assert (config.num_layers, config.hidden_size, config.num_heads) == (2, 768, 12)
        assert (config.vocab_size, config.feature_dim) == (50, 19)

    def test_file_config_then_overrides(self):
        service = PipelineService({'model': {'hidden_size': 32, 'num_heads': 4}})
        assert service.model_config(10, 3).hidden_size == 32
        assert service.model_config(10, 3, {'hidden_size': 16}).hidden_size == 16

    def test_seed_injected(self, service):
        assert service.train_config(7).seed == 7
        assert service.pretrain_config(3, {'steps': 5}).steps == 5

    def test_unknown_key(self, service):
        with pytest.raises(ConfigurationError):
            service.eval_config({'thresh': 0.4})


@pytest.mark.unit
class TestData:
    """Generation, preprocessing and loading of data directories."""

    def test_generated_layout(self, data_dir):
        for name in ('train.jsonl', 'validation.jsonl', 'test.jsonl', SCENES_FILE, VOCAB_FILE, META_FILE):
            assert (data_dir / name).exists(), name
        meta = json.loads((data_dir / META_FILE).read_text())
        assert meta['feature_dim'] == 19
        assert meta['scenes'] == 20

    def test_generation_is_deterministic(self, tmp_path, service, data_dir):
        service.generate_data(tmp_path, seed=1, overrides={'n_scenes': 20})
        for name in ('train.jsonl', 'test.jsonl', VOCAB_FILE):
            assert (tmp_path / name).read_bytes() == (data_dir / name).read_bytes()

    def test_preprocess_reproduces_generated_splits(self, tmp_path, service, data_dir):
        result = service.preprocess(data_dir / SCENES_FILE, tmp_path, seed=1)
        assert result['counts'] == json.loads((data_dir / META_FILE).read_text())['counts']
        assert (tmp_path / 'validation.jsonl').read_bytes() == (data_dir / 'validation.jsonl').read_bytes()

    def test_preprocess_max_contexts(self, tmp_path, service, data_dir):
        service.preprocess(data_dir / SCENES_FILE, tmp_path, seed=1, max_contexts=3)
        assert all(len(s.contexts) <= 3 for s in read_samples(tmp_path / 'train.jsonl'))

    def test_load_data(self, service, data_dir):
        splits, vocab, feature_dim = service.load_data(data_dir)
        assert splits.train and splits.validation and splits.test
        assert len(vocab) == json.loads((data_dir / META_FILE).read_text())['vocab_size']
        assert feature_dim == 19

    def test_invalid_generator_parameters(self, tmp_path, service):
        with pytest.raises(DataError):
            service.generate_data(tmp_path, seed=0, overrides={'n_scenes': 0})

    def test_missing_scene_file(self, tmp_path, service):
        with pytest.raises(DataError):
            service.preprocess(tmp_path / 'absent.jsonl', tmp_path / 'out', seed=0)


@pytest.mark.integration
class TestTrainingAndEvaluation:
    """Fine-tuning, evaluation and prediction on a tiny model."""

    def test_train_summary(self, run_dir):
        summary = json.loads((run_dir / 'summary.json').read_text())
        assert summary['best_step'] == 2
        assert set(summary) == {'best_step', 'val_acc', 'test_acc', 'confusion', 'checkpoint'}
        assert (run_dir / RUN_CONFIG_FILE).exists()

    def test_evaluate(self, service, data_dir, run_dir):
        checkpoint = run_dir / 'checkpoints' / 'step_000002.ckpt'
        result = service.evaluate(checkpoint, data_dir, 'validation')
        assert set(result) == {'TP', 'FP', 'FN', 'TN', 'accuracy', 'n'}
        assert result['TP'] + result['FP'] + result['FN'] + result['TN'] == result['n']
        summary = json.loads((run_dir / 'summary.json').read_text())
        assert result['accuracy'] == pytest.approx(summary['val_acc'])

    def test_evaluate_sample_file(self, service, data_dir, run_dir):
        checkpoint = run_dir / 'checkpoints' / 'step_000002.ckpt'
        result = service.evaluate(checkpoint, data_dir / 'test.jsonl')
        assert result['n'] == len(read_samples(data_dir / 'test.jsonl'))

    def test_predict(self, service, data_dir, run_dir):
        records = service.predict(run_dir / 'checkpoints' / 'step_000002.ckpt', data_dir, 'test')
        assert [r['id'] for r in records] == [s.sample_id for s in read_samples(data_dir / 'test.jsonl')]

    def test_unknown_split(self, service, data_dir, run_dir):
        with pytest.raises(ValidationError):
            service.evaluate(run_dir / 'checkpoints' / 'step_000002.ckpt', data_dir, 'dev')

    def test_missing_checkpoint(self, tmp_path, service, data_dir):
        with pytest.raises(CheckpointError):
            service.evaluate(tmp_path / 'absent.ckpt', data_dir)

    def test_too_few_context_slots(self, tmp_path, service, data_dir):
        with pytest.raises(ValidationError):
            service.train(data_dir, tmp_path, seed=0,
                          model_overrides={**TINY_MODEL, 'max_contexts': 2},
                          train_overrides=SHORT_RUN)

    def test_pretrain_then_train(self, tmp_path, service, data_dir):
        pretrained = tmp_path / PRETRAINED_FILE
        result = service.pretrain(data_dir, pretrained, seed=0, model_overrides=TINY_MODEL,
                                  pretrain_overrides={'steps': 2, 'batch_size': 4})
        assert result['steps'] == 2
        summary = service.train(data_dir, tmp_path / 'run', seed=0, model_overrides=TINY_MODEL,
                                train_overrides=SHORT_RUN, init_checkpoint=pretrained)
        assert summary['best_step'] == 2


@pytest.mark.integration
class TestExperiments:
    """Ablations and gradient checks."""

    def test_unknown_variant(self, tmp_path, service, data_dir):
        with pytest.raises(ValidationError):
            service.ablate('no-text', data_dir, tmp_path, seed=0)

    @pytest.mark.parametrize('variant', ABLATION_VARIANTS)
    def test_variants(self, tmp_path, service, data_dir, variant):
        result = service.ablate(variant, data_dir, tmp_path, seed=0,
                                model_overrides=TINY_MODEL, train_overrides=SHORT_RUN,
                                pretrain_overrides={'steps': 1, 'batch_size': 4})
        assert result['variant'] == variant
        assert (result['pretrain'] is None) == (variant == 'no-pretrain')
        assert (tmp_path / PRETRAINED_FILE).exists() == (variant != 'no-pretrain')
        assert result['summary']['best_step'] == 2
        run_config = json.loads((tmp_path / RUN_CONFIG_FILE).read_text())
        expected = 'late' if variant == 'late-fusion' else 'early'
        assert run_config['model']['fusion'] == expected

    def test_grad_check(self, service):
        result = service.grad_check(seed=0, max_entries=2)
        assert result['passed'] is True
        assert result['max_relative_error'] < result['tolerance']
        assert set(result['parameters']) == {'early', 'late', 'relative_difference'}
