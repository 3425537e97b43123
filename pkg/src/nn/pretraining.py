"""
Pretraining objectives: masked language modeling (MLM) and image-text
matching (ITM).

An ITM example pairs a scene's regions with an instruction; with probability
``itm_corrupt_prob`` the instruction is swapped for one from another scene
and the pair is labeled mismatched (0). The target slot holds the region
best overlapping the instruction's ground-truth box.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.core.errors.exceptions import DataError
from src.core.logging.logger import Logger
from src.data.batching import collate
from src.data.boxes import iou
from src.models.region import Region
from src.models.sample import Sample, Scene
from src.nn.uniter import TargetDependentUniter
from src.numerics import ops
from src.numerics.ops import TRAIN
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor
from src.tokenizer.vocab import MASK_ID, SPECIAL_TOKENS, Vocab

MATCHED = 1
MISMATCHED = 0

logger = Logger.get_logger(__name__)


class PretrainLoss(NamedTuple):
    """MLM and ITM terms of one pretraining batch."""

    mlm: Tensor
    itm: Tensor

    @property
    def total(self) -> Tensor:
        return ops.add(self.mlm, self.itm)


def mlm_mask(
    ids: Sequence[int],
    rng: PrngState,
    rate: float = 0.15,
    vocab_size: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Choose positions for masked language modeling.

    Each position is selected independently with probability ``rate``.
    A selected token becomes [MASK] 80% of the time, a random non-special
    token 10% of the time and stays unchanged otherwise. Without
    ``vocab_size`` the random branch leaves the token unchanged.

    Args:
        ids: Token ids of one instruction
        rng: Random stream
        rate: Selection probability
        vocab_size: Vocabulary size for random replacements

    Returns:
        (masked ids, selected positions in increasing order)
    """
    ids = np.asarray(ids, dtype=np.int64)
    n = ids.shape[0]
    selected = rng.uniform(n) < rate
    kind = rng.uniform(n)
    masked = ids.copy()
    masked[selected & (kind < 0.8)] = MASK_ID
    if vocab_size is not None and vocab_size > len(SPECIAL_TOKENS):
        random_ids = rng.integers(len(SPECIAL_TOKENS), vocab_size, n)
        swap = selected & (kind >= 0.8) & (kind < 0.9)
        masked[swap] = random_ids[swap]
    return masked, np.flatnonzero(selected)


def _anchor_region(scene: Scene, index: int) -> int:
    """Index of the detection overlapping instruction ``index``'s box most."""
    gt = scene.target_boxes[index]
    overlaps = [iou(r.bbox, gt) for r in scene.regions]
    return int(np.argmax(overlaps))


def _kept_contexts(scene: Scene, anchor: int, max_contexts: Optional[int]) -> List[Region]:
    """
    First ``max_contexts`` regions of ``scene``, with the anchor always kept.

    When truncation would drop the anchor it takes the last kept slot.
    """
    if max_contexts is None or anchor < max_contexts:
        return scene.regions[:max_contexts]
    logger.debug(
        f"anchor region {anchor} of scene {scene.scene_id} lies beyond "
        f"max_contexts={max_contexts}; it replaces region {max_contexts - 1}"
    )
    return scene.regions[:max_contexts - 1] + [scene.regions[anchor]]


def build_itm_pairs(
    scenes: Sequence[Scene],
    batch_size: int,
    rng: PrngState,
    corrupt_prob: float = 0.5,
    max_contexts: Optional[int] = None
) -> List[Sample]:
    """
    Draw ``batch_size`` image-text pairs with ITM labels.

    Args:
        scenes: Scenes with at least one instruction and one region
        batch_size: Number of pairs
        rng: Random stream
        corrupt_prob: Probability of swapping in another scene's instruction
        max_contexts: Keep only the first regions of each scene (the
            anchor region is swapped in if it falls outside them)

    Returns:
        Samples whose ``label`` is the ITM label

    Raises:
        DataError: If no scene has both regions and instructions, or a
            swap is needed but only one scene is usable
    """
    usable = [s for s in scenes if s.regions and s.instructions]
    if not usable:
        raise DataError("pretraining needs scenes with regions and instructions")

    pairs: List[Sample] = []
    for k in range(batch_size):
        scene_idx = rng.integers(0, len(usable))
        scene = usable[scene_idx]
        instr_idx = rng.integers(0, len(scene.instructions))
        anchor = _anchor_region(scene, instr_idx)
        contexts = _kept_contexts(scene, anchor, max_contexts)
        target = scene.regions[anchor]
        text = scene.instructions[instr_idx]
        label = MATCHED
        if float(rng.uniform()) < corrupt_prob:
            if len(usable) < 2:
                raise DataError("instruction swapping needs at least two scenes")
            other_idx = rng.integers(0, len(usable) - 1)
            other = usable[other_idx + (other_idx >= scene_idx)]
            text = other.instructions[rng.integers(0, len(other.instructions))]
            label = MISMATCHED
        pairs.append(Sample(
            f"{scene.scene_id}-itm{k}",
            text,
            target,
            contexts,
            scene.image_size,
            label,
        ))
    return pairs


def pretrain_step(
    model: TargetDependentUniter,
    pairs: Sequence[Sample],
    vocab: Vocab,
    rng: PrngState,
    mlm_rate: float = 0.15,
    mode: str = TRAIN
) -> PretrainLoss:
    """
    Combined MLM + ITM loss of one pretraining batch.

    MLM is the summed cross entropy of the mlm head over the final states of
    masked text positions; ITM is the summed cross entropy of the itm head on
    the pooled target-slot vector. Run under an active tape to train.

    Args:
        model: Model to pretrain
        pairs: ITM-labeled samples (see :func:`build_itm_pairs`)
        vocab: Vocabulary
        rng: Stream for masking and dropout
        mlm_rate: MLM selection probability
        mode: 'train' or 'infer'

    Returns:
        PretrainLoss with scalar terms; ``total`` is their sum
    """
    batch = collate(pairs, vocab, model.config)
    masked = batch.text_ids.copy()
    targets: List[int] = []
    flat_positions: List[int] = []
    mask_rng = rng.fork('mlm')
    T = batch.text_length
    for row in range(batch.size):
        length = int(batch.text_mask[row].sum())
        if length == 0:
            continue
        row_ids, chosen = mlm_mask(batch.text_ids[row, :length], mask_rng, mlm_rate, vocab.size)
        masked[row, :length] = row_ids
        targets.extend(int(batch.text_ids[row, c]) for c in chosen)
        flat_positions.extend(row * T + int(c) for c in chosen)

    encoded = model.encode_batch(batch.with_text_ids(masked), mode, rng.fork('dropout'))
    params = model.params
    itm_loss = ops.cross_entropy(params.itm(encoded.pooled), batch.labels)
    if not targets:
        return PretrainLoss(Tensor(np.zeros((), dtype=itm_loss.dtype)), itm_loss)

    hidden = model.config.hidden_size
    states = ops.reshape(encoded.text_states, (batch.size * T, hidden))
    picked = ops.take(states, np.asarray(flat_positions, dtype=np.int64))
    mlm_loss = ops.cross_entropy(params.mlm(picked), targets)
    return PretrainLoss(mlm_loss, itm_loss)
