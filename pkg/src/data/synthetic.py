"""
Synthetic tabletop scenes with fetching instructions.

Each scene holds about five objects, each described by a (color, shape,
place) triple that is unique within the scene, so every instruction of the
form "pick up the <color> <shape> on the <place>" denotes exactly one object.
Objects occupy disjoint grid cells: one column per place, one row per slot.
A detection's feature vector is the concatenation of the object's attribute
one-hots plus Gaussian noise, standing in for precomputed detector features.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.core.errors.exceptions import DataError
from src.core.logging.logger import Logger
from src.data.labeling import preprocess_scenes
from src.models.region import Box, Region
from src.models.sample import DatasetSplit, Scene
from src.numerics.prng import PrngState

logger = Logger.get_logger(__name__)

COLORS = ('red', 'blue', 'green', 'yellow', 'white', 'black', 'orange', 'purple')
SHAPES = ('cup', 'bottle', 'box', 'can', 'ball', 'towel', 'sponge', 'bowl')
PLACES = ('table', 'shelf', 'tray')
TEMPLATES = (
    'pick up the {color} {shape} on the {place}',
    'bring me the {color} {shape} from the {place}',
    'grab the {color} {shape} on the {place}',
    'take the {color} {shape} off the {place}',
)


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    """Parameters of the synthetic scene generator."""

    n_scenes: int = 600
    objects_per_scene: int = 5
    instructions_per_scene: int = 2
    feature_noise: float = 0.1
    image_size: Tuple[float, float] = (640.0, 480.0)
    split_fractions: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    loose_detection_prob: float = 0.5
    colors: Tuple[str, ...] = COLORS
    shapes: Tuple[str, ...] = SHAPES
    places: Tuple[str, ...] = PLACES
    vocab_size: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'image_size', tuple(float(v) for v in self.image_size))
        object.__setattr__(self, 'split_fractions', tuple(float(v) for v in self.split_fractions))
        for name in ('colors', 'shapes', 'places'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            DataError: If the inventory cannot give every object a unique
                description or other parameters are out of range
        """
        if self.n_scenes < 1 or self.objects_per_scene < 1:
            raise DataError("n_scenes and objects_per_scene must be positive")
        if not 1 <= self.instructions_per_scene <= self.objects_per_scene:
            raise DataError("instructions_per_scene must be in [1, objects_per_scene]")
        if not self.colors or not self.shapes or not self.places:
            raise DataError("attribute inventory must not be empty")
        if self.triple_count < self.objects_per_scene:
            raise DataError(
                "attribute inventory too small for uniquely describable objects",
                {'triples': self.triple_count, 'objects_per_scene': self.objects_per_scene}
            )
        if len(self.split_fractions) != 3 or any(f < 0 for f in self.split_fractions) \
                or abs(sum(self.split_fractions) - 1.0) > 1e-6:
            raise DataError("split_fractions must be three non-negative values summing to 1")
        if self.feature_noise < 0 or not 0.0 <= self.loose_detection_prob <= 1.0:
            raise DataError("feature_noise and loose_detection_prob out of range")

    @property
    def triple_count(self) -> int:
        return len(self.colors) * len(self.shapes) * len(self.places)

    @property
    def feature_dim(self) -> int:
        return len(self.colors) + len(self.shapes) + len(self.places)

    def split_of(self, index: int) -> str:
        """Split name of the scene at ``index``."""
        n_train = int(round(self.n_scenes * self.split_fractions[0]))
        n_val = int(round(self.n_scenes * self.split_fractions[1]))
        if index < n_train:
            return 'train'
        if index < n_train + n_val:
            return 'validation'
        return 'test'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_scenes': self.n_scenes,
            'objects_per_scene': self.objects_per_scene,
            'instructions_per_scene': self.instructions_per_scene,
            'feature_noise': self.feature_noise,
            'image_size': list(self.image_size),
            'split_fractions': list(self.split_fractions),
            'loose_detection_prob': self.loose_detection_prob,
            'colors': list(self.colors),
            'shapes': list(self.shapes),
            'places': list(self.places),
            'vocab_size': self.vocab_size,
            'seed': self.seed,
        }


@dataclass
class _SceneObject:
    color: int
    shape: int
    place: int
    box: Box


def _features(spec: SyntheticDatasetSpec, obj: _SceneObject, rng: PrngState) -> np.ndarray:
    one_hot = np.zeros(spec.feature_dim, dtype=np.float64)
    one_hot[obj.color] = 1.0
    one_hot[len(spec.colors) + obj.shape] = 1.0
    one_hot[len(spec.colors) + len(spec.shapes) + obj.place] = 1.0
    return (one_hot + rng.normal(spec.feature_dim, std=spec.feature_noise)).astype(np.float32)


def _jitter(box: Box, fraction: float, spec: SyntheticDatasetSpec, rng: PrngState) -> Box:
    """Shift every edge by up to ``fraction`` of the box size, clipped to the image."""
    width, height = spec.image_size
    dx = (rng.uniform(2) * 2.0 - 1.0) * fraction * box.width
    dy = (rng.uniform(2) * 2.0 - 1.0) * fraction * box.height
    x1 = float(np.clip(box.x1 + dx[0], 0.0, width))
    x2 = float(np.clip(box.x2 + dx[1], 0.0, width))
    y1 = float(np.clip(box.y1 + dy[0], 0.0, height))
    y2 = float(np.clip(box.y2 + dy[1], 0.0, height))
    return Box(round(min(x1, x2), 2), round(min(y1, y2), 2),
               round(max(x1, x2), 2), round(max(y1, y2), 2))


def _shift(box: Box, spec: SyntheticDatasetSpec, rng: PrngState) -> Box:
    """A loosely aligned detection: the box slid sideways by 30-45% of its width."""
    width, _ = spec.image_size
    offset = (0.30 + 0.15 * float(rng.uniform())) * box.width
    if box.x2 + offset > width:
        offset = -offset
    return Box(round(box.x1 + offset, 2), box.y1, round(box.x2 + offset, 2), box.y2)


def _make_objects(spec: SyntheticDatasetSpec, rng: PrngState) -> List[_SceneObject]:
    width, height = spec.image_size
    cell_w = width / len(spec.places)
    cell_h = height / spec.objects_per_scene
    triples = rng.choice(spec.triple_count, spec.objects_per_scene, replace=False)
    per_place = len(spec.shapes)
    per_color = per_place * len(spec.places)
    used_rows: Dict[int, List[int]] = {}
    objects: List[_SceneObject] = []
    for t in triples:
        color, rest = divmod(int(t), per_color)
        place, shape = divmod(rest, per_place)
        free = [r for r in range(spec.objects_per_scene) if r not in used_rows.get(place, [])]
        row = free[rng.integers(0, len(free))]
        used_rows.setdefault(place, []).append(row)
        margin = 0.1 + 0.15 * rng.uniform(4)
        box = Box(
            round(place * cell_w + margin[0] * cell_w, 2),
            round(row * cell_h + margin[1] * cell_h, 2),
            round((place + 1) * cell_w - margin[2] * cell_w, 2),
            round((row + 1) * cell_h - margin[3] * cell_h, 2),
        )
        objects.append(_SceneObject(color, shape, place, box))
    return objects


def _describe(spec: SyntheticDatasetSpec, obj: _SceneObject, rng: PrngState) -> str:
    template = TEMPLATES[rng.integers(0, len(TEMPLATES))]
    return template.format(
        color=spec.colors[obj.color],
        shape=spec.shapes[obj.shape],
        place=spec.places[obj.place],
    )


def generate_scene(spec: SyntheticDatasetSpec, index: int, rng: PrngState) -> Scene:
    """
    Generate one scene with jittered detections and instructions.

    Every object gets one tight detection; with ``loose_detection_prob`` it
    also gets a sideways-shifted one whose overlap lands in the excluded band.
    """
    objects = _make_objects(spec, rng)
    regions: List[Region] = []
    for obj in objects:
        tight = _jitter(obj.box, 0.04, spec, rng)
        regions.append(Region(_features(spec, obj, rng), tight, 0.5 + 0.5 * float(rng.uniform())))
        if float(rng.uniform()) < spec.loose_detection_prob:
            loose = _shift(obj.box, spec, rng)
            regions.append(Region(_features(spec, obj, rng), loose, 0.2 + 0.5 * float(rng.uniform())))
    regions = rng.shuffle(regions)

    chosen = rng.choice(len(objects), spec.instructions_per_scene, replace=False)
    instructions = [_describe(spec, objects[i], rng) for i in chosen]
    target_boxes = [objects[i].box for i in chosen]
    return Scene(
        f"scene{index:05d}",
        spec.image_size,
        regions,
        instructions,
        target_boxes,
        spec.split_of(index),
    )


def generate_synthetic_dataset(spec: SyntheticDatasetSpec) -> Tuple[List[Scene], DatasetSplit]:
    """
    Generate scenes and their labeled, balanced sample splits.

    Args:
        spec: Generator parameters (including the seed)

    Returns:
        (scenes, DatasetSplit)
    """
    root = PrngState(spec.seed)
    scenes = [generate_scene(spec, i, root.fork('scene', i)) for i in range(spec.n_scenes)]
    logger.info(f"Generated {len(scenes)} synthetic scenes (seed {spec.seed})")
    splits = preprocess_scenes(scenes, root.fork('preprocess'))
    return scenes, splits


def matching_objects(
    spec: SyntheticDatasetSpec,
    instruction: str,
    regions: Sequence[Region]
) -> List[Region]:
    """
    Regions whose noiseless attributes match every attribute named in
    ``instruction``. Used to audit that descriptions are unambiguous.
    """
    words = set(instruction.split())
    matches = []
    offsets = (0, len(spec.colors), len(spec.colors) + len(spec.shapes))
    for region in regions:
        names = []
        for inventory, offset in zip((spec.colors, spec.shapes, spec.places), offsets):
            block = region.feat[offset:offset + len(inventory)]
            names.append(inventory[int(np.argmax(block))])
        if all(name in words for name in names):
            matches.append(region)
    return matches
