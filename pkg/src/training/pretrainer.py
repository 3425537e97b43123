"""
MLM + ITM pretraining loop over a scene corpus.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors.exceptions import TrainingDivergedError
from src.core.logging.logger import Logger
from src.models.sample import Scene
from src.nn.pretraining import build_itm_pairs, pretrain_step
from src.nn.uniter import TargetDependentUniter
from src.numerics.optim import AdamW
from src.numerics.prng import PrngState
from src.numerics.tensor import Tape
from src.tokenizer.vocab import Vocab
from src.training.config import PretrainConfig

logger = Logger.get_logger(__name__)


@dataclass
class PretrainResult:
    """Per-step total, MLM and ITM losses."""

    losses: List[float] = field(default_factory=list)
    mlm_losses: List[float] = field(default_factory=list)
    itm_losses: List[float] = field(default_factory=list)
    optimizer: Optional[AdamW] = None

    def to_dict(self) -> dict:
        tail = self.losses[-100:]
        return {
            'steps': len(self.losses),
            'first_loss': self.losses[0] if self.losses else None,
            'final_loss_mean': float(np.mean(tail)) if tail else None,
        }


def run_pretraining(
    model: TargetDependentUniter,
    scenes: Sequence[Scene],
    vocab: Vocab,
    config: PretrainConfig
) -> PretrainResult:
    """
    Pretrain ``model`` in place with MLM and ITM.

    Step ``s`` draws its pairs, masks and dropout from
    ``PrngState(seed).fork('pretrain', s)``.

    Args:
        model: Model to pretrain
        scenes: Scene corpus (normally the training scenes)
        vocab: Vocabulary
        config: Pretraining schedule

    Returns:
        PretrainResult

    Raises:
        TrainingDivergedError: If a step produces a non-finite loss
    """
    optimizer = AdamW(model.named_parameters(), config.hyper())
    root = PrngState(config.seed)
    report_every = Logger.progress_interval()
    result = PretrainResult(optimizer=optimizer)
    logger.info(f"Pretraining for {config.steps} steps on {len(scenes)} scenes")

    for step in range(1, config.steps + 1):
        step_rng = root.fork('pretrain', step)
        pairs = build_itm_pairs(
            scenes, config.batch_size, step_rng.fork('pairs'),
            config.itm_corrupt_prob, model.config.max_contexts,
        )
        optimizer.zero_grad()
        with Tape() as tape:
            parts = pretrain_step(model, pairs, vocab, step_rng, config.mlm_rate)
            total = parts.total
        value = total.item()
        if not np.isfinite(value):
            raise TrainingDivergedError(step, value)
        tape.backward(total)
        optimizer.step()
        result.losses.append(value)
        result.mlm_losses.append(parts.mlm.item())
        result.itm_losses.append(parts.itm.item())
        if step % report_every == 0:
            logger.debug(
                f"pretrain step {step}: loss={value:.4f} "
                f"mlm={parts.mlm.item():.4f} itm={parts.itm.item():.4f}"
            )
    logger.info(f"Pretraining finished: {result.to_dict()}")
    return result
