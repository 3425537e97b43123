"""
Padding a list of samples into model-ready arrays.

Text is padded to the longest instruction in the batch. The region sequence
holds the target in slot 0 followed by the contexts, padded to the largest
context count in the batch. Masks mark real slots.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors.exceptions import DimensionError, ValidationError
from src.models.sample import Sample
from src.nn.config import LOCATION_DIM, ModelConfig
from src.nn.embedders import region_arrays
from src.numerics.tensor import get_default_dtype
from src.tokenizer.vocab import PAD_ID, Vocab
from src.tokenizer.wordpiece import encode


@dataclass
class Batch:
    """
    Padded model inputs for B samples.

    Attributes:
        sample_ids: Sample ids in batch order
        text_ids: Token ids [B, T] (padding = [PAD])
        text_positions: Token positions [B, T]
        text_mask: Real text slots [B, T]
        features: Region features [B, N+1, D], slot 0 = target
        locations: Location vectors [B, N+1, 7]
        region_mask: Real region slots [B, N+1]
        labels: Labels [B]
    """

    sample_ids: List[str]
    text_ids: np.ndarray
    text_positions: np.ndarray
    text_mask: np.ndarray
    features: np.ndarray
    locations: np.ndarray
    region_mask: np.ndarray
    labels: np.ndarray

    @property
    def size(self) -> int:
        return len(self.sample_ids)

    @property
    def text_length(self) -> int:
        """Padded text length T; the target slot sits at this index."""
        return int(self.text_ids.shape[1])

    @property
    def sequence_mask(self) -> np.ndarray:
        """Key mask over the fused sequence [B, T+N+1]."""
        return np.concatenate([self.text_mask, self.region_mask], axis=1)

    def with_text_ids(self, text_ids: np.ndarray) -> 'Batch':
        """Copy of this batch with replaced token ids (same shape)."""
        if text_ids.shape != self.text_ids.shape:
            raise DimensionError("token id shape changed", text_ids.shape, self.text_ids.shape)
        return Batch(
            self.sample_ids, text_ids, self.text_positions, self.text_mask,
            self.features, self.locations, self.region_mask, self.labels,
        )


def collate(
    samples: Sequence[Sample],
    vocab: Vocab,
    config: ModelConfig,
    labels: Optional[Sequence[int]] = None
) -> Batch:
    """
    Tokenize and pad samples.

    Args:
        samples: Samples to batch
        vocab: Vocabulary for tokenizing instructions
        config: Model shape (max positions, max contexts, feature size)
        labels: Labels to use instead of the samples' own

    Returns:
        Batch

    Raises:
        ValidationError: If the batch is empty or a sample has more than
            ``max_contexts`` contexts
        DimensionError: If a sample's feature size differs from the model's
    """
    if not samples:
        raise ValidationError("cannot collate an empty batch")
    encoded = []
    regions = []
    for sample in samples:
        sample.check_context_bound(config.max_contexts)
        if sample.feature_dim != config.feature_dim:
            raise DimensionError(
                f"sample {sample.sample_id} feature size differs from the model",
                (sample.feature_dim,), (config.feature_dim,)
            )
        encoded.append(encode(sample.instruction, vocab, config.max_positions))
        regions.append(region_arrays(sample.target, sample.contexts, sample.image_size))

    size = len(samples)
    text_len = max(len(e) for e in encoded)
    slots = max(f.shape[0] for f, _ in regions)
    dtype = get_default_dtype()

    text_ids = np.full((size, text_len), PAD_ID, dtype=np.int64)
    text_positions = np.zeros((size, text_len), dtype=np.int64)
    text_mask = np.zeros((size, text_len), dtype=bool)
    features = np.zeros((size, slots, config.feature_dim), dtype=dtype)
    locations = np.zeros((size, slots, LOCATION_DIM), dtype=dtype)
    region_mask = np.zeros((size, slots), dtype=bool)

    for i, (enc, (feat, loc)) in enumerate(zip(encoded, regions)):
        n = len(enc)
        text_ids[i, :n] = enc.ids
        text_positions[i, :n] = enc.positions
        text_mask[i, :n] = True
        features[i, :feat.shape[0]] = feat
        locations[i, :loc.shape[0]] = loc
        region_mask[i, :feat.shape[0]] = True

    label_values = [s.label for s in samples] if labels is None else list(labels)
    return Batch(
        [s.sample_id for s in samples],
        text_ids,
        text_positions,
        text_mask,
        features,
        locations,
        region_mask,
        np.asarray(label_values, dtype=np.int64),
    )


def batches(
    samples: Sequence[Sample],
    vocab: Vocab,
    config: ModelConfig,
    batch_size: int
) -> List[Batch]:
    """Split ``samples`` in order into consecutive batches."""
    if batch_size < 1:
        raise ValidationError("batch_size must be positive", {'batch_size': batch_size})
    return [
        collate(samples[i:i + batch_size], vocab, config)
        for i in range(0, len(samples), batch_size)
    ]
