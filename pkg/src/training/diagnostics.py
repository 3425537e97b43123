"""
Gradient verification and parameter audits on small models.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from src.core.logging.logger import Logger
from src.data.batching import Batch
from src.nn.config import EARLY_FUSION, LATE_FUSION, LOCATION_DIM, ModelConfig
from src.nn.params import count_parameters, init_model_params
from src.nn.uniter import TargetDependentUniter
from src.numerics.gradcheck import GradCheckReport, check_gradients
from src.numerics.ops import INFER
from src.numerics.prng import PrngState
from src.numerics.tensor import default_dtype, get_default_dtype
from src.tokenizer.vocab import SPECIAL_TOKENS

TINY_CONFIG = ModelConfig(
    num_layers=2,
    hidden_size=16,
    num_heads=2,
    dropout=0.0,
    max_positions=8,
    max_contexts=4,
    vocab_size=20,
    feature_dim=5,
)

logger = Logger.get_logger(__name__)


def random_batch(
    config: ModelConfig,
    rng: PrngState,
    batch_size: int = 2,
    text_length: int = 6,
    contexts: int = 3
) -> Batch:
    """
    A padded batch of random inputs.

    The last sample is one token and one context shorter than the others
    (when sizes allow) so padding is exercised. The target slot copies a
    context chosen at random.
    """
    dtype = get_default_dtype()
    ids = np.zeros((batch_size, text_length), dtype=np.int64)
    positions = np.zeros_like(ids)
    text_mask = np.zeros(ids.shape, dtype=bool)
    slots = contexts + 1
    features = np.zeros((batch_size, slots, config.feature_dim), dtype=dtype)
    locations = np.zeros((batch_size, slots, LOCATION_DIM), dtype=dtype)
    region_mask = np.zeros((batch_size, slots), dtype=bool)

    for row in range(batch_size):
        short = row == batch_size - 1 and batch_size > 1
        t = max(text_length - 1, 0) if short and text_length > 1 else text_length
        n = contexts - 1 if short and contexts > 1 else contexts
        ids[row, :t] = rng.integers(len(SPECIAL_TOKENS), config.vocab_size, t)
        positions[row, :t] = np.arange(t)
        text_mask[row, :t] = True
        feats = rng.normal((n, config.feature_dim)).astype(dtype)
        corners = np.sort(rng.uniform((n, 2, 2)), axis=1)
        x1, x2 = corners[:, 0, 0], corners[:, 1, 0]
        y1, y2 = corners[:, 0, 1], corners[:, 1, 1]
        w, h = x2 - x1, y2 - y1
        locs = np.stack([x1, y1, x2, y2, w, h, w * h], axis=1).astype(dtype)
        pick = rng.integers(0, n)
        features[row, 0], locations[row, 0] = feats[pick], locs[pick]
        features[row, 1:n + 1], locations[row, 1:n + 1] = feats, locs
        region_mask[row, :n + 1] = True

    labels = rng.integers(0, 2, batch_size).astype(np.int64)
    return Batch(
        [f"random{i}" for i in range(batch_size)],
        ids, positions, text_mask, features, locations, region_mask, labels,
    )


def gradient_check(
    config: ModelConfig = TINY_CONFIG,
    seed: int = 0,
    max_entries_per_tensor: Optional[int] = None,
    h: float = 1e-5,
    text_length: int = 6,
    contexts: int = 3
) -> GradCheckReport:
    """
    Compare end-to-end analytic gradients with central differences.

    Runs in float64 with dropout disabled, over every model parameter
    (pretraining heads excluded since the classification loss ignores them).

    Args:
        config: Model shape
        seed: Seed for parameters and inputs
        max_entries_per_tensor: Sample this many entries per tensor
        h: Finite-difference step
        text_length: Text tokens per sample
        contexts: Context regions per sample

    Returns:
        GradCheckReport
    """
    root = PrngState(seed)
    with default_dtype('float64'):
        model = TargetDependentUniter(config, init_model_params(config, root.fork('init')))
        batch = random_batch(config, root.fork('inputs'), 2, text_length, contexts)
        params = {
            name: t for name, t in model.named_parameters().items()
            if not name.startswith(('mlm.', 'itm.'))
        }
        report = check_gradients(
            lambda: model.batch_loss(batch, INFER),
            params,
            h=h,
            max_entries_per_tensor=max_entries_per_tensor,
            rng=root.fork('entries'),
        )
    logger.info(
        f"Gradient check: max relative error {report.max_relative_error:.3e} "
        f"over {report.checked_entries} entries"
    )
    return report


@dataclass
class ParameterAudit:
    """Parameter counts of the early- and late-fusion variants of one shape."""

    early: int
    late: int

    @property
    def relative_difference(self) -> float:
        return abs(self.late - self.early) / self.early

    def to_dict(self) -> Dict[str, Any]:
        return {
            'early': self.early,
            'late': self.late,
            'relative_difference': self.relative_difference,
        }


def parameter_audit(config: ModelConfig) -> ParameterAudit:
    """Count parameters of both fusion variants of ``config``."""
    rng = PrngState(0)
    early = count_parameters(init_model_params(config.replace(fusion=EARLY_FUSION), rng))
    late = count_parameters(init_model_params(config.replace(fusion=LATE_FUSION), rng))
    return ParameterAudit(early, late)
