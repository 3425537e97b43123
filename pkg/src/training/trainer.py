"""
Fine-tuning loop.

Every step processes one batch. Batches are read from a continuous stream
over the training set: epoch ``e`` visits the samples in the order of a
permutation drawn from ``fork('epoch', e)``, and a batch may span an epoch
boundary. Dropout for step ``s`` uses ``fork('step', s)``. Both streams are
derived from the seed alone, so a run resumed from a checkpoint replays the
uninterrupted run exactly.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from src.core.errors.exceptions import TrainingDivergedError, ValidationError
from src.core.logging.logger import Logger
from src.data.batching import collate
from src.data.jsonl_io import write_json
from src.models.sample import DatasetSplit, Sample
from src.nn.uniter import TargetDependentUniter
from src.numerics.ops import TRAIN
from src.numerics.optim import AdamW
from src.numerics.prng import PrngState
from src.numerics.tensor import Tape
from src.tokenizer.vocab import Vocab
from src.training.checkpoint import load_checkpoint, load_parameters, optimizer_for, save_checkpoint
from src.training.config import EvalConfig, TrainConfig
from src.training.metrics import evaluate
from src.training.train_log import EvalRecord, TrainLog

LOG_FILE = 'train_log.jsonl'
SUMMARY_FILE = 'summary.json'
CHECKPOINT_DIR = 'checkpoints'

PathLike = Union[str, Path]

logger = Logger.get_logger(__name__)


def checkpoint_name(step: int) -> str:
    return f"step_{step:06d}.ckpt"


class BatchStream:
    """Sample indices for any step, reshuffled at every epoch boundary."""

    def __init__(self, size: int, batch_size: int, rng: PrngState):
        if size < 1:
            raise ValidationError("training set is empty")
        self.size = size
        self.batch_size = batch_size
        self.rng = rng
        self._orders: Dict[int, np.ndarray] = {}

    def _order(self, epoch: int) -> np.ndarray:
        if epoch not in self._orders:
            self._orders = {epoch: self.rng.fork('epoch', epoch).permutation(self.size)}
        return self._orders[epoch]

    def indices(self, step: int) -> List[int]:
        """Indices of the batch for 1-based ``step``."""
        start = (step - 1) * self.batch_size
        result = []
        for position in range(start, start + self.batch_size):
            epoch, offset = divmod(position, self.size)
            result.append(int(self._order(epoch)[offset]))
        return result


@dataclass
class TrainResult:
    """Evaluation log, checkpoint paths and per-step losses of a run."""

    log: TrainLog
    checkpoints: List[Path] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)

    def summary(self) -> Dict:
        return self.log.summary()


class Trainer:
    """
    Fine-tunes a model on a dataset split.

    Args:
        model: Model to train in place
        splits: Train, validation and test samples
        vocab: Vocabulary
        config: Training schedule
        eval_config: Evaluation settings
        run_dir: Directory for the log, checkpoints and summary (no files
            are written when None)
    """

    def __init__(
        self,
        model: TargetDependentUniter,
        splits: DatasetSplit,
        vocab: Vocab,
        config: TrainConfig,
        eval_config: EvalConfig = EvalConfig(),
        run_dir: Optional[PathLike] = None
    ):
        if not splits.train or not splits.validation or not splits.test:
            raise ValidationError("training needs non-empty train, validation and test splits",
                                  splits.counts())
        self.model = model
        self.splits = splits
        self.vocab = vocab
        self.config = config
        self.eval_config = eval_config
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.optimizer = AdamW(model.named_parameters(), config.hyper())
        self.root = PrngState(config.seed).fork('train')
        self.stream = BatchStream(len(splits.train), config.batch_size, self.root)
        self.log = TrainLog(config.eval_every)
        self.start_step = 0
        self.report_every = Logger.progress_interval()

    def resume(self, checkpoint_path: PathLike) -> int:
        """
        Restore parameters, AdamW state and step from a checkpoint.

        Earlier evaluation records are read back from the run directory.

        Returns:
            The restored step
        """
        checkpoint = load_checkpoint(checkpoint_path)
        load_parameters(self.model, checkpoint, strict=True)
        self.optimizer.state = optimizer_for(self.model, checkpoint)
        self.start_step = checkpoint.step
        if self.run_dir is not None and (self.run_dir / LOG_FILE).exists():
            self.log = TrainLog.read(self.run_dir / LOG_FILE, self.config.eval_every) \
                .truncated(self.start_step)
        logger.info(f"Resumed from {checkpoint_path} at step {self.start_step}")
        return self.start_step

    def _batch(self, step: int) -> List[Sample]:
        train = self.splits.train
        return [train[i] for i in self.stream.indices(step)]

    def _step(self, step: int) -> float:
        self.optimizer.zero_grad()
        batch = collate(self._batch(step), self.vocab, self.model.config)
        with Tape() as tape:
            loss = self.model.batch_loss(batch, TRAIN, self.root.fork('step', step))
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingDivergedError(step, value)
        tape.backward(loss)
        self.optimizer.step()
        return value

    def _evaluate(self, step: int, window: Sequence[float]) -> EvalRecord:
        val = evaluate(self.model, self.splits.validation, self.vocab, self.eval_config)
        test = evaluate(self.model, self.splits.test, self.vocab, self.eval_config)
        path = None
        if self.run_dir is not None:
            path = save_checkpoint(
                self.run_dir / CHECKPOINT_DIR / checkpoint_name(step),
                self.model, self.optimizer.state, step,
            )
        record = EvalRecord(
            step,
            float(np.mean(window)) if window else float('nan'),
            val.accuracy,
            test.accuracy,
            val.confusion,
            test.confusion,
            None if path is None else str(path.relative_to(self.run_dir)),
        )
        logger.info(
            f"step {step}: train_loss={record.train_loss:.4f} "
            f"val_acc={val.accuracy:.4f} test_acc={test.accuracy:.4f}"
        )
        return record

    def run(self) -> TrainResult:
        """
        Train from ``start_step`` to ``config.steps``.

        Raises:
            TrainingDivergedError: If a step produces a non-finite loss
        """
        result = TrainResult(self.log)
        window: List[float] = []
        cfg = self.config
        logger.info(
            f"Training {self.model.parameter_count()} parameters for steps "
            f"{self.start_step + 1}..{cfg.steps} (batch {cfg.batch_size})"
        )
        for step in range(self.start_step + 1, cfg.steps + 1):
            value = self._step(step)
            window.append(value)
            result.losses.append(value)
            if step % self.report_every == 0:
                logger.debug(f"step {step}: loss={value:.4f}")
            if step % cfg.eval_every == 0:
                record = self._evaluate(step, window)
                self.log.append(record)
                window = []
                if self.run_dir is not None:
                    result.checkpoints.append(self.run_dir / record.checkpoint)
                    self.log.write(self.run_dir / LOG_FILE)

        if self.run_dir is not None and self.log.records:
            write_json(self.run_dir / SUMMARY_FILE, self.log.summary())
        return result


def train(
    model: TargetDependentUniter,
    splits: DatasetSplit,
    vocab: Vocab,
    config: TrainConfig,
    eval_config: EvalConfig = EvalConfig(),
    run_dir: Optional[PathLike] = None,
    init_checkpoint: Optional[PathLike] = None,
    resume_from: Optional[PathLike] = None
) -> TrainResult:
    """
    Fine-tune ``model`` and evaluate it every ``eval_every`` steps.

    Args:
        model: Model to train in place
        splits: Dataset splits
        vocab: Vocabulary
        config: Training schedule
        eval_config: Evaluation settings
        run_dir: Output directory for log, checkpoints and summary
        init_checkpoint: Pretrained weights to start from (parameters only;
            heads absent from the checkpoint keep their initial values)
        resume_from: Checkpoint of this run to continue from

    Returns:
        TrainResult
    """
    if init_checkpoint is not None and resume_from is None:
        loaded = load_parameters(model, load_checkpoint(init_checkpoint), strict=False)
        logger.info(f"Initialised {len(loaded)} tensors from {init_checkpoint}")
    trainer = Trainer(model, splits, vocab, config, eval_config, run_dir)
    if resume_from is not None:
        trainer.resume(resume_from)
    return trainer.run()
