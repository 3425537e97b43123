"""
IoU-based candidate labeling, class balancing and scene preprocessing.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors.exceptions import DataError
from src.core.logging.logger import Logger
from src.data.boxes import BoxLike, iou, to_box
from src.models.region import Region
from src.models.sample import SPLIT_NAMES, DatasetSplit, Sample, Scene
from src.numerics.prng import PrngState

POSITIVE_IOU = 0.7
NEGATIVE_IOU = 0.3

logger = Logger.get_logger(__name__)


@dataclass
class LabeledCandidates:
    """Candidates with a label, plus those excluded by the IoU band."""

    labeled: List[Tuple[Region, int]] = field(default_factory=list)
    discarded: List[Region] = field(default_factory=list)


def label_candidates(
    detections: Sequence[Region],
    gt_box: BoxLike,
    positive: float = POSITIVE_IOU,
    negative: float = NEGATIVE_IOU
) -> LabeledCandidates:
    """
    Label detections against a ground-truth box.

    IoU strictly above ``positive`` gives label 1, strictly below
    ``negative`` gives label 0; anything in between (bounds included) is
    discarded as a candidate.

    Args:
        detections: Detected regions
        gt_box: Ground-truth box of the instructed object
        positive: Positive threshold
        negative: Negative threshold

    Returns:
        LabeledCandidates in detection order
    """
    gt = to_box(gt_box)
    result = LabeledCandidates()
    for region in detections:
        beta = iou(region.bbox, gt)
        if beta > positive:
            result.labeled.append((region, 1))
        elif beta < negative:
            result.labeled.append((region, 0))
        else:
            result.discarded.append(region)
    return result


def balance(samples: Sequence[Sample], rng: PrngState) -> List[Sample]:
    """
    Downsample the majority class to the minority count.

    Kept majority samples are chosen uniformly without replacement and the
    combined output is shuffled.

    Raises:
        DataError: If either class is empty
    """
    positives = [s for s in samples if s.label == 1]
    negatives = [s for s in samples if s.label == 0]
    if not positives or not negatives:
        raise DataError(
            "cannot balance: a class is empty",
            {'positives': len(positives), 'negatives': len(negatives)}
        )
    k = min(len(positives), len(negatives))

    def keep(group: List[Sample]) -> List[Sample]:
        if len(group) == k:
            return group
        chosen = np.sort(rng.choice(len(group), k, replace=False))
        return [group[i] for i in chosen]

    return rng.shuffle(keep(positives) + keep(negatives))


def samples_for_scene(scene: Scene, max_contexts: Optional[int] = None) -> List[Sample]:
    """
    Build labeled samples for every instruction of a scene.

    All detections stay available as context regions, including those
    discarded as candidates.

    Args:
        scene: Scene with detections and instructions
        max_contexts: Keep only the first ``max_contexts`` detections

    Returns:
        Samples in (instruction, detection) order
    """
    contexts = scene.regions if max_contexts is None else scene.regions[:max_contexts]
    samples: List[Sample] = []
    for i, (text, gt) in enumerate(zip(scene.instructions, scene.target_boxes)):
        candidates = label_candidates(contexts, gt)
        for region, label in candidates.labeled:
            index = contexts.index(region)
            samples.append(Sample(
                f"{scene.scene_id}-i{i}-r{index}",
                text,
                region,
                contexts,
                scene.image_size,
                label,
            ))
    return samples


def preprocess_scenes(
    scenes: Sequence[Scene],
    rng: PrngState,
    max_contexts: Optional[int] = None
) -> DatasetSplit:
    """
    Label and balance every split of a scene corpus.

    Each split is balanced independently with its own child stream.

    Returns:
        DatasetSplit
    """
    grouped: Dict[str, List[Sample]] = {name: [] for name in SPLIT_NAMES}
    for scene in scenes:
        grouped[scene.split].extend(samples_for_scene(scene, max_contexts))

    balanced: Dict[str, List[Sample]] = {}
    for name in SPLIT_NAMES:
        raw = grouped[name]
        balanced[name] = balance(raw, rng.fork('balance', name)) if raw else []
        logger.info(
            f"Split {name}: {len(raw)} labeled candidates -> "
            f"{len(balanced[name])} balanced samples"
        )
    return DatasetSplit(balanced['train'], balanced['validation'], balanced['test'])
