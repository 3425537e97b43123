"""
Pipeline service: dataset generation, preprocessing, pretraining,
fine-tuning, evaluation, ablations and gradient checks.

The command-line layer only parses flags and prints results; every
operation it offers is a method here.
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.core.config.config_manager import ConfigManager
from src.core.errors.error_handler import ErrorHandler
from src.core.errors.exceptions import BaseApplicationError, DataError, ValidationError
from src.core.logging.logger import Logger
from src.data.ablation import halve_all
from src.data.jsonl_io import (
    META_FILE,
    SCENES_FILE,
    VOCAB_FILE,
    read_json,
    read_samples,
    read_scenes,
    read_splits,
    write_json,
    write_scenes,
    write_splits,
)
from src.data.labeling import preprocess_scenes
from src.data.synthetic import SyntheticDatasetSpec, generate_synthetic_dataset
from src.models.sample import SPLIT_NAMES, DatasetSplit, Sample, Scene, max_context_count
from src.nn.config import LATE_FUSION, ModelConfig
from src.nn.uniter import TargetDependentUniter
from src.numerics.prng import PrngState
from src.numerics.tensor import set_checked, set_default_dtype
from src.tokenizer.vocab import Vocab, build_vocab
from src.training.checkpoint import load_checkpoint, restore_model, save_checkpoint
from src.training.config import EvalConfig, PretrainConfig, TrainConfig
from src.training.diagnostics import TINY_CONFIG, gradient_check, parameter_audit
from src.training.metrics import evaluate, predict
from src.training.pretrainer import run_pretraining
from src.training.trainer import train

PathLike = Union[str, Path]
Overrides = Optional[Mapping[str, Any]]

FULL = 'full'
LATE_FUSION_VARIANT = 'late-fusion'
FEW_CONTEXTS = 'few-contexts'
NO_PRETRAIN = 'no-pretrain'
ABLATION_VARIANTS = (FULL, LATE_FUSION_VARIANT, FEW_CONTEXTS, NO_PRETRAIN)

PRETRAINED_FILE = 'pretrained.ckpt'
RUN_CONFIG_FILE = 'run_config.json'


class PipelineService:
    """
    Runs the stages of the grounding pipeline.

    Configuration precedence for each stage is: explicit overrides (from
    command-line flags), the user config file, the YAML layers, then the
    dataclass defaults.

    Args:
        file_config: Parsed user configuration file
    """

    def __init__(self, file_config: Optional[Dict[str, Any]] = None):
        """Initialize the pipeline service."""
        self.logger = Logger.get_logger(__name__)
        self.error_handler = ErrorHandler(__name__)
        self.config = ConfigManager()
        self.file_config = file_config or {}

        numerics = {**(self.config.get('numerics', {}) or {}), **(self.file_config.get('numerics') or {})}
        set_default_dtype(numerics.get('dtype', 'float32'))
        set_checked(bool(numerics.get('checked', False)))

    # ------------------------------------------------------------------
    # configuration
    # ------------------------------------------------------------------

    def _section(self, section: str, target: type, overrides: Overrides = None) -> Any:
        return self.config.resolve_section(section, target, self.file_config, overrides)

    def model_config(self, vocab_size: int, feature_dim: int, overrides: Overrides = None) -> ModelConfig:
        """Model shape for a dataset with the given vocabulary and feature sizes."""
        merged = {**(overrides or {}), 'vocab_size': vocab_size, 'feature_dim': feature_dim}
        return self._section('model', ModelConfig, merged)

    def train_config(self, seed: int, overrides: Overrides = None) -> TrainConfig:
        return self._section('training', TrainConfig, {**(overrides or {}), 'seed': seed})

    def pretrain_config(self, seed: int, overrides: Overrides = None) -> PretrainConfig:
        return self._section('pretraining', PretrainConfig, {**(overrides or {}), 'seed': seed})

    def eval_config(self, overrides: Overrides = None) -> EvalConfig:
        return self._section('evaluation', EvalConfig, overrides)

    # ------------------------------------------------------------------
    # data
    # ------------------------------------------------------------------

    def generate_data(self, out_dir: PathLike, seed: int, overrides: Overrides = None) -> Dict[str, Any]:
        """
        Generate a synthetic corpus and write it as a data directory.

        The directory holds ``scenes.jsonl``, the three split files,
        ``vocab.txt`` and ``meta.json``.

        Args:
            out_dir: Output directory
            seed: Generator seed
            overrides: Values for the ``data`` section

        Returns:
            Summary with paths, split counts and sizes

        Raises:
            DataError: If the generator parameters are invalid
        """
        out_dir = Path(out_dir)
        self.logger.info(f"Generating synthetic data into {out_dir}")
        try:
            spec = self._section('data', SyntheticDatasetSpec, {**(overrides or {}), 'seed': seed})
            scenes, splits = generate_synthetic_dataset(spec)
            vocab = build_vocab((text for s in scenes for text in s.instructions), spec.vocab_size)
            return self._write_data_dir(out_dir, scenes, splits, vocab, {'generator': spec.to_dict()})
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'out_dir': str(out_dir)}, reraise=True)
            raise

    def preprocess(
        self,
        scenes_path: PathLike,
        out_dir: PathLike,
        seed: int,
        max_contexts: Optional[int] = None
    ) -> Dict[str, Any]:
        """
        Label and balance a scene file into a data directory.

        A vocabulary is built from the scenes' instructions unless one
        already sits next to the scene file.

        Args:
            scenes_path: ``scenes.jsonl`` to read
            out_dir: Output directory
            seed: Seed of the balancing streams
            max_contexts: Keep at most this many detections per sample

        Returns:
            Summary with paths and split counts
        """
        scenes_path = Path(scenes_path)
        out_dir = Path(out_dir)
        self.logger.info(f"Preprocessing {scenes_path} into {out_dir}")
        try:
            scenes = read_scenes(scenes_path)
            if not scenes:
                raise DataError(f"No scenes in {scenes_path}", {'path': str(scenes_path)})
            splits = preprocess_scenes(scenes, PrngState(seed).fork('preprocess'), max_contexts)
            sibling = scenes_path.parent / VOCAB_FILE
            if sibling.exists():
                vocab = Vocab.load(sibling)
            else:
                target = int(self._section('data', SyntheticDatasetSpec).vocab_size)
                vocab = build_vocab((text for s in scenes for text in s.instructions), target)
            return self._write_data_dir(out_dir, scenes, splits, vocab, {'source': str(scenes_path)})
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'scenes': str(scenes_path)}, reraise=True)
            raise

    def _write_data_dir(
        self,
        out_dir: Path,
        scenes: List[Scene],
        splits: DatasetSplit,
        vocab: Vocab,
        extra: Dict[str, Any]
    ) -> Dict[str, Any]:
        write_scenes(out_dir / SCENES_FILE, scenes)
        paths = write_splits(out_dir, splits)
        vocab.save(out_dir / VOCAB_FILE)
        feature_dim = next((r.feature_dim for s in scenes for r in s.regions), 0)
        meta = {
            'counts': splits.counts(),
            'feature_dim': feature_dim,
            'scenes': len(scenes),
            'vocab_size': len(vocab),
            **extra,
        }
        write_json(out_dir / META_FILE, meta)
        self.logger.info(f"Wrote data directory {out_dir}: {splits.counts()}")
        return {
            'out': str(out_dir),
            'splits': {name: str(path) for name, path in paths.items()},
            'counts': splits.counts(),
            'feature_dim': feature_dim,
            'vocab_size': len(vocab),
        }

    def load_data(self, data_dir: PathLike) -> Tuple[DatasetSplit, Vocab, int]:
        """
        Read splits, vocabulary and feature size of a data directory.

        Returns:
            (splits, vocab, feature_dim)
        """
        data_dir = Path(data_dir)
        splits = read_splits(data_dir)
        vocab = Vocab.load(data_dir / VOCAB_FILE)
        meta: Dict[str, Any] = {}
        if (data_dir / META_FILE).exists():
            meta = ErrorHandler.safe_execute(
                read_json, data_dir / META_FILE, default={}, logger_name=__name__
            ) or {}
        feature_dim = meta.get('feature_dim')
        if feature_dim is None:
            first = next((s for _, samples in splits.items() for s in samples), None)
            if first is None:
                raise DataError(f"Data directory {data_dir} holds no samples")
            feature_dim = first.feature_dim
        return splits, vocab, int(feature_dim)

    def _train_scenes(self, data_dir: Path) -> List[Scene]:
        scenes = [s for s in read_scenes(data_dir / SCENES_FILE) if s.split == 'train']
        if not scenes:
            raise DataError(f"No training scenes in {data_dir / SCENES_FILE}")
        return scenes

    def _samples(self, data: PathLike, split: str) -> Tuple[List[Sample], Vocab]:
        """Samples of one split of a data directory, or of a single sample file."""
        data = Path(data)
        if data.is_dir():
            if split not in SPLIT_NAMES:
                raise ValidationError(f"Unknown split: {split}", {'split': split})
            return read_samples(data / f"{split}.jsonl"), Vocab.load(data / VOCAB_FILE)
        return read_samples(data), Vocab.load(data.parent / VOCAB_FILE)

    # ------------------------------------------------------------------
    # models
    # ------------------------------------------------------------------

    def build_model(self, config: ModelConfig, seed: int) -> TargetDependentUniter:
        """Freshly initialised model; parameters come from ``fork('init')`` of the seed."""
        model = TargetDependentUniter(config, rng=PrngState(seed).fork('init'))
        self.logger.info(f"Built {config.fusion}-fusion model with {model.parameter_count()} parameters")
        return model

    def pretrain(
        self,
        data_dir: PathLike,
        out_path: PathLike,
        seed: int,
        model_overrides: Overrides = None,
        pretrain_overrides: Overrides = None
    ) -> Dict[str, Any]:
        """
        Pretrain a model on the training scenes and save its weights.

        Returns:
            Summary with the checkpoint path and loss statistics
        """
        data_dir = Path(data_dir)
        try:
            _, vocab, feature_dim = self.load_data(data_dir)
            model = self.build_model(self.model_config(len(vocab), feature_dim, model_overrides), seed)
            config = self.pretrain_config(seed, pretrain_overrides)
            return self._pretrain(model, self._train_scenes(data_dir), vocab, config, Path(out_path))
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'data': str(data_dir)}, reraise=True)
            raise

    def _pretrain(
        self,
        model: TargetDependentUniter,
        scenes: List[Scene],
        vocab: Vocab,
        config: PretrainConfig,
        out_path: Path
    ) -> Dict[str, Any]:
        result = run_pretraining(model, scenes, vocab, config)
        save_checkpoint(out_path, model, step=config.steps)
        return {'checkpoint': str(out_path), **result.to_dict()}

    def train(
        self,
        data_dir: PathLike,
        out_dir: PathLike,
        seed: int,
        model_overrides: Overrides = None,
        train_overrides: Overrides = None,
        eval_overrides: Overrides = None,
        init_checkpoint: Optional[PathLike] = None,
        resume: Optional[PathLike] = None
    ) -> Dict[str, Any]:
        """
        Fine-tune on a data directory, evaluating every ``eval_every`` steps.

        Args:
            data_dir: Directory with split files and vocabulary
            out_dir: Run directory (log, checkpoints, summary)
            seed: Seed of initialisation, shuffling and dropout
            model_overrides: Values for the ``model`` section
            train_overrides: Values for the ``training`` section
            eval_overrides: Values for the ``evaluation`` section
            init_checkpoint: Pretrained weights to start from
            resume: Checkpoint of this run to continue from (its model
                config wins over ``model_overrides``)

        Returns:
            Summary ``{best_step, val_acc, test_acc, confusion, checkpoint}``
        """
        data_dir = Path(data_dir)
        try:
            splits, vocab, feature_dim = self.load_data(data_dir)
            if resume is not None:
                model = TargetDependentUniter(load_checkpoint(resume).config)
            else:
                model = self.build_model(self.model_config(len(vocab), feature_dim, model_overrides), seed)
            return self._train(
                model, splits, vocab, Path(out_dir),
                self.train_config(seed, train_overrides), self.eval_config(eval_overrides),
                init_checkpoint, resume,
            )
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'data': str(data_dir), 'out': str(out_dir)},
                                            reraise=True)
            raise

    def _train(
        self,
        model: TargetDependentUniter,
        splits: DatasetSplit,
        vocab: Vocab,
        out_dir: Path,
        config: TrainConfig,
        eval_config: EvalConfig,
        init_checkpoint: Optional[PathLike] = None,
        resume: Optional[PathLike] = None
    ) -> Dict[str, Any]:
        longest = max(max_context_count(samples) for _, samples in splits.items())
        if longest > model.config.max_contexts:
            raise ValidationError(
                "samples have more context regions than the model accepts",
                {'contexts': longest, 'max_contexts': model.config.max_contexts}
            )
        write_json(out_dir / RUN_CONFIG_FILE, {
            'model': model.config.to_dict(),
            'training': config.to_dict(),
            'evaluation': eval_config.to_dict(),
            'init_checkpoint': None if init_checkpoint is None else str(init_checkpoint),
            'parameters': model.parameter_count(),
        })
        result = train(model, splits, vocab, config, eval_config, out_dir, init_checkpoint, resume)
        summary = result.summary()
        if summary.get('checkpoint'):
            summary['checkpoint'] = str(out_dir / summary['checkpoint'])
        return summary

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def evaluate(
        self,
        checkpoint: PathLike,
        data: PathLike,
        split: str = 'test',
        eval_overrides: Overrides = None
    ) -> Dict[str, Any]:
        """
        Evaluate a checkpoint on one split.

        Returns:
            ``{TP, FP, FN, TN, accuracy, n}``
        """
        try:
            model = restore_model(load_checkpoint(checkpoint))
            samples, vocab = self._samples(data, split)
            result = evaluate(model, samples, vocab, self.eval_config(eval_overrides))
            self.logger.info(f"Accuracy on {data} ({split}): {result.accuracy:.4f}")
            return result.to_dict()
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'checkpoint': str(checkpoint)}, reraise=True)
            raise

    def predict(
        self,
        checkpoint: PathLike,
        data: PathLike,
        split: str = 'test',
        eval_overrides: Overrides = None
    ) -> List[Dict[str, Any]]:
        """Per-sample ``{id, p, predicted, label}`` records."""
        try:
            model = restore_model(load_checkpoint(checkpoint))
            samples, vocab = self._samples(data, split)
            return predict(model, samples, vocab, self.eval_config(eval_overrides))
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'checkpoint': str(checkpoint)}, reraise=True)
            raise

    # ------------------------------------------------------------------
    # experiments
    # ------------------------------------------------------------------

    def ablate(
        self,
        variant: str,
        data_dir: PathLike,
        out_dir: PathLike,
        seed: int,
        model_overrides: Overrides = None,
        train_overrides: Overrides = None,
        pretrain_overrides: Overrides = None,
        eval_overrides: Overrides = None
    ) -> Dict[str, Any]:
        """
        Run one ablation variant end to end.

        ``full`` pretrains then fine-tunes the early-fusion model.
        ``late-fusion`` does the same with the late-fusion model.
        ``few-contexts`` halves every sample's contexts before fine-tuning.
        ``no-pretrain`` fine-tunes from random initialisation.

        Returns:
            ``{variant, parameters, pretrain, summary}``

        Raises:
            ValidationError: If the variant is unknown
        """
        data_dir = Path(data_dir)
        out_dir = Path(out_dir)
        try:
            if variant not in ABLATION_VARIANTS:
                raise ValidationError(f"Unknown ablation variant: {variant}",
                                      {'variant': variant, 'known': list(ABLATION_VARIANTS)})
            self.logger.info(f"Running ablation '{variant}' into {out_dir}")
            splits, vocab, feature_dim = self.load_data(data_dir)
            overrides = dict(model_overrides or {})
            if variant == LATE_FUSION_VARIANT:
                overrides['fusion'] = LATE_FUSION
            if variant == FEW_CONTEXTS:
                splits = DatasetSplit(*(halve_all(samples) for _, samples in splits.items()))
            model = self.build_model(self.model_config(len(vocab), feature_dim, overrides), seed)

            pretrain_summary = None
            init = None
            if variant != NO_PRETRAIN:
                init = out_dir / PRETRAINED_FILE
                pretrain_summary = self._pretrain(
                    model, self._train_scenes(data_dir), vocab,
                    self.pretrain_config(seed, pretrain_overrides), init,
                )
            summary = self._train(
                model, splits, vocab, out_dir,
                self.train_config(seed, train_overrides), self.eval_config(eval_overrides),
                init,
            )
            return {
                'variant': variant,
                'parameters': model.parameter_count(),
                'pretrain': pretrain_summary,
                'summary': summary,
            }
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'variant': variant}, reraise=True)
            raise

    def grad_check(
        self,
        seed: int,
        model_overrides: Overrides = None,
        max_entries: Optional[int] = None,
        tolerance: float = 1e-5
    ) -> Dict[str, Any]:
        """
        End-to-end gradient check of a small model in float64.

        Returns:
            ``{max_relative_error, tolerance, passed, checked_entries,
            per_parameter, parameters}``
        """
        try:
            config = TINY_CONFIG.replace(**{k: v for k, v in (model_overrides or {}).items() if v is not None})
            report = gradient_check(config, seed, max_entries)
            return {
                'max_relative_error': report.max_relative_error,
                'tolerance': tolerance,
                'passed': report.passed(tolerance),
                'checked_entries': report.checked_entries,
                'per_parameter': report.per_parameter,
                'parameters': parameter_audit(config).to_dict(),
            }
        except BaseApplicationError as e:
            self.error_handler.handle_error(e, context={'seed': seed}, reraise=True)
            raise
