"""
Target-dependent UNITER: embedders, transformer and the classification head.

Under early fusion the text tokens, the target slot and every context region
go through one transformer stack and the head reads the final-layer vector at
the target slot. Under late fusion the target is transformed by a separate
stack and the two pooled outputs meet in a fusion FC before the head.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from src.core.errors.exceptions import ValidationError
from src.core.logging.logger import Logger
from src.data.batching import Batch, collate
from src.models.sample import Sample
from src.nn.config import LATE_FUSION, ModelConfig
from src.nn.embedders import embed_regions, embed_tokens
from src.nn.params import (
    ModelParams,
    cast_parameters,
    count_parameters,
    init_model_params,
    named_parameters,
)
from src.nn.transformer import encode, late_fusion_encode
from src.numerics import ops
from src.numerics.ops import INFER
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor
from src.tokenizer.vocab import Vocab

logger = Logger.get_logger(__name__)


@dataclass(frozen=True)
class Prediction:
    """
    Output for one sample.

    Attributes:
        p: [p(incorrect), p(correct)]
        pooled: Vector fed to the head
    """

    p: np.ndarray
    pooled: np.ndarray

    @property
    def correct(self) -> float:
        return float(self.p[1])


@dataclass
class EncodedBatch:
    """Pooled vectors [B, H] and final text-slot states [B, T, H]."""

    pooled: Tensor
    text_states: Tensor


def loss(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """
    Batch-summed cross entropy of the 2-way prediction.

    Raises:
        ValidationError: If label count differs from the logit rows
    """
    return ops.cross_entropy(logits, labels)


class TargetDependentUniter:
    """
    The model: configuration plus parameters.

    Parameters are read-only during evaluation, so one instance may serve
    concurrent inference calls; training must be serialised by the caller.

    Example:
        >>> model = TargetDependentUniter(ModelConfig(hidden_size=16, num_heads=2))
        >>> prediction = model.forward(sample, vocab)
    """

    def __init__(
        self,
        config: ModelConfig,
        params: Optional[ModelParams] = None,
        rng: Optional[PrngState] = None
    ):
        self.config = config
        self.params = params or init_model_params(config, rng or PrngState(0))

    def named_parameters(self) -> Dict[str, Tensor]:
        return named_parameters(self.params)

    def parameter_count(self) -> int:
        return count_parameters(self.params)

    def astype(self, dtype: str) -> 'TargetDependentUniter':
        """Convert all parameters in place (e.g. to float64 for checks)."""
        cast_parameters(self.params, dtype)
        return self

    def encode_batch(self, batch: Batch, mode: str = INFER,
                     rng: Optional[PrngState] = None) -> EncodedBatch:
        """
        Run embedders and transformer over a padded batch.

        Args:
            batch: Collated inputs
            mode: 'train' (dropout on) or 'infer'
            rng: Dropout stream for train mode

        Returns:
            EncodedBatch
        """
        cfg = self.config
        p = self.params
        eps = cfg.layer_norm_eps
        text = embed_tokens(batch.text_ids, batch.text_positions, p.text, eps)
        image = embed_regions(batch.features, batch.locations, p.image, eps)
        T = batch.text_length

        if cfg.fusion == LATE_FUSION:
            slots = image.shape[1]
            contexts = ops.narrow(image, 1, 1, slots - 1)
            target = ops.narrow(image, 1, 0, 1)
            mask_a = np.concatenate([batch.text_mask, batch.region_mask[:, 1:]], axis=1)
            split = cfg.late_split
            pooled_a, pooled_b, states_a = late_fusion_encode(
                text, contexts, target,
                p.layers[:split], p.layers[split:],
                mode, rng, mask_a, cfg.dropout, eps,
                return_states=True,
            )
            fused = ops.gelu(p.fusion(ops.concat([pooled_a, pooled_b], axis=-1)))
            return EncodedBatch(fused, ops.narrow(states_a, 1, 0, T))

        states = encode(text, image, p.layers, mode, rng, batch.sequence_mask, cfg.dropout, eps)
        return EncodedBatch(ops.select(states, 1, T), ops.narrow(states, 1, 0, T))

    def logits(self, batch: Batch, mode: str = INFER,
               rng: Optional[PrngState] = None) -> Tensor:
        """Head logits [B, 2]."""
        return self.params.head(self.encode_batch(batch, mode, rng).pooled)

    def batch_loss(self, batch: Batch, mode: str = INFER,
                   rng: Optional[PrngState] = None) -> Tensor:
        """Summed cross entropy of the batch against its labels."""
        return loss(self.logits(batch, mode, rng), batch.labels)

    def predict_proba(self, batch: Batch) -> np.ndarray:
        """Inference-mode probabilities [B, 2]."""
        return ops.softmax(self.logits(batch, INFER), axis=-1).numpy()

    def forward(
        self,
        sample: Sample,
        vocab: Vocab,
        mode: str = INFER,
        rng: Optional[PrngState] = None
    ) -> Prediction:
        """
        Score one sample.

        Raises:
            ValidationError: If the sample has more contexts than the model
                accepts or its target is not among its contexts
        """
        if len(sample.contexts) + 1 + self.config.max_positions > self.config.max_sequence:
            raise ValidationError(
                "sequence exceeds the model's maximum length",
                {'contexts': len(sample.contexts), 'max_contexts': self.config.max_contexts}
            )
        batch = collate([sample], vocab, self.config)
        encoded = self.encode_batch(batch, mode, rng)
        probs = ops.softmax(self.params.head(encoded.pooled), axis=-1)
        return Prediction(probs.numpy()[0], encoded.pooled.numpy()[0])
