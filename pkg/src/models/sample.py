"""
Scenes, classification samples and dataset splits.
"""

from typing import Any, Dict, Iterator, List, Sequence, Tuple

from src.core.errors.exceptions import ValidationError
from src.models.base_model import BaseModel
from src.models.region import Box, Region
from src.utils.validators import Validators

SPLIT_NAMES = ('train', 'validation', 'test')


def _image_size(value: Any) -> Tuple[float, float]:
    if not Validators.is_image_size(list(value) if isinstance(value, tuple) else value):
        raise ValidationError("image_size must be [W, H] with W, H > 0", {'image_size': value})
    return (float(value[0]), float(value[1]))


class Sample(BaseModel):
    """
    One (instruction, target candidate, context regions, label) tuple.

    The target candidate is one of the context regions. Label 1 means the
    candidate is the object the instruction refers to.
    """

    def __init__(
        self,
        sample_id: str,
        instruction: str,
        target: Region,
        contexts: Sequence[Region],
        image_size: Sequence[float],
        label: int
    ):
        self.sample_id = sample_id
        self.instruction = instruction
        self.target = target
        self.contexts: List[Region] = list(contexts)
        self.image_size = _image_size(image_size)
        self.label = label
        self.validate()

    def validate(self) -> bool:
        if not Validators.is_valid_id(self.sample_id):
            raise ValidationError("sample id must be alphanumeric", {'id': self.sample_id})
        if not isinstance(self.instruction, str):
            raise ValidationError("instruction must be a string", {'id': self.sample_id})
        if self.label not in (0, 1) or isinstance(self.label, bool):
            raise ValidationError("label must be 0 or 1", {'id': self.sample_id, 'label': self.label})
        if not self.contexts:
            raise ValidationError("sample needs at least one context region", {'id': self.sample_id})
        if self.target not in self.contexts:
            raise ValidationError(
                "target region is not among the context regions",
                {'id': self.sample_id}
            )
        dims = {r.feature_dim for r in self.contexts}
        if len(dims) != 1:
            raise ValidationError("context feature sizes differ", {'id': self.sample_id})
        for region in self.contexts:
            if not region.bbox.inside(self.image_size):
                raise ValidationError(
                    "region lies outside the image",
                    {'id': self.sample_id, 'bbox': region.bbox.to_list()}
                )
        return True

    def check_context_bound(self, max_contexts: int) -> None:
        """
        Raises:
            ValidationError: If there are more than ``max_contexts`` contexts
        """
        if len(self.contexts) > max_contexts:
            raise ValidationError(
                "too many context regions",
                {'id': self.sample_id, 'contexts': len(self.contexts), 'max': max_contexts}
            )

    @property
    def target_index(self) -> int:
        """Index of the first context equal to the target."""
        return self.contexts.index(self.target)

    @property
    def feature_dim(self) -> int:
        return self.target.feature_dim

    def with_contexts(self, contexts: Sequence[Region]) -> 'Sample':
        """Copy of this sample with a different context list."""
        return Sample(
            self.sample_id, self.instruction, self.target,
            contexts, self.image_size, self.label
        )

    def with_target(self, target: Region) -> 'Sample':
        """Copy of this sample judging a different candidate."""
        return Sample(
            self.sample_id, self.instruction, target,
            self.contexts, self.image_size, self.label
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.sample_id,
            'instruction': self.instruction,
            'image_size': [self.image_size[0], self.image_size[1]],
            'target': self.target.to_dict(),
            'contexts': [r.to_dict() for r in self.contexts],
            'label': self.label,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Sample':
        required = ['id', 'instruction', 'image_size', 'target', 'contexts', 'label']
        if not Validators.has_required_keys(data, required):
            raise ValidationError("sample record is missing keys", {'required': required})
        return cls(
            data['id'],
            data['instruction'],
            Region.from_dict(data['target']),
            [Region.from_dict(r) for r in data['contexts']],
            data['image_size'],
            data['label'],
        )

    def __repr__(self) -> str:
        return (
            f"Sample(id={self.sample_id}, label={self.label}, "
            f"contexts={len(self.contexts)})"
        )


class Scene(BaseModel):
    """
    An image with its detected regions and the instructions given about it.

    ``target_boxes[i]`` is the ground-truth box of the object that
    ``instructions[i]`` refers to.
    """

    def __init__(
        self,
        scene_id: str,
        image_size: Sequence[float],
        regions: Sequence[Region],
        instructions: Sequence[str],
        target_boxes: Sequence[Box],
        split: str = 'train'
    ):
        self.scene_id = scene_id
        self.image_size = _image_size(image_size)
        self.regions: List[Region] = list(regions)
        self.instructions: List[str] = list(instructions)
        self.target_boxes: List[Box] = list(target_boxes)
        self.split = split
        self.validate()

    def validate(self) -> bool:
        if not Validators.is_valid_id(self.scene_id):
            raise ValidationError("scene id must be alphanumeric", {'id': self.scene_id})
        if self.split not in SPLIT_NAMES:
            raise ValidationError("unknown split", {'split': self.split})
        if len(self.instructions) != len(self.target_boxes):
            raise ValidationError(
                "each instruction needs exactly one ground-truth box",
                {'id': self.scene_id}
            )
        for region in self.regions:
            if not region.bbox.inside(self.image_size):
                raise ValidationError(
                    "region lies outside the image",
                    {'id': self.scene_id, 'bbox': region.bbox.to_list()}
                )
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.scene_id,
            'split': self.split,
            'image_size': [self.image_size[0], self.image_size[1]],
            'regions': [r.to_dict() for r in self.regions],
            'instructions': list(self.instructions),
            'target_boxes': [b.to_list() for b in self.target_boxes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Scene':
        required = ['id', 'image_size', 'regions', 'instructions', 'target_boxes']
        if not Validators.has_required_keys(data, required):
            raise ValidationError("scene record is missing keys", {'required': required})
        return cls(
            data['id'],
            data['image_size'],
            [Region.from_dict(r) for r in data['regions']],
            data['instructions'],
            [Box.from_list(b) for b in data['target_boxes']],
            data.get('split', 'train'),
        )

    def __repr__(self) -> str:
        return f"Scene(id={self.scene_id}, regions={len(self.regions)}, split={self.split})"


class DatasetSplit(BaseModel):
    """Train, validation and test sample lists with disjoint ids."""

    def __init__(
        self,
        train: Sequence[Sample],
        validation: Sequence[Sample],
        test: Sequence[Sample]
    ):
        self.train: List[Sample] = list(train)
        self.validation: List[Sample] = list(validation)
        self.test: List[Sample] = list(test)
        self.validate()

    def validate(self) -> bool:
        seen: Dict[str, str] = {}
        for name, samples in self.items():
            for sample in samples:
                if sample.sample_id in seen:
                    raise ValidationError(
                        "sample id appears twice",
                        {'id': sample.sample_id, 'splits': [seen[sample.sample_id], name]}
                    )
                seen[sample.sample_id] = name
        return True

    def items(self) -> Iterator[Tuple[str, List[Sample]]]:
        yield 'train', self.train
        yield 'validation', self.validation
        yield 'test', self.test

    def get(self, name: str) -> List[Sample]:
        if name not in SPLIT_NAMES:
            raise ValidationError("unknown split", {'split': name})
        return getattr(self, name)

    def counts(self) -> Dict[str, int]:
        return {name: len(samples) for name, samples in self.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {name: [s.to_dict() for s in samples] for name, samples in self.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DatasetSplit':
        return cls(*[
            [Sample.from_dict(s) for s in data.get(name, [])] for name in SPLIT_NAMES
        ])

    def __repr__(self) -> str:
        return f"DatasetSplit({self.counts()})"


def max_context_count(samples: Sequence[Sample]) -> int:
    """Largest context list among ``samples`` (0 when empty)."""
    return max((len(s.contexts) for s in samples), default=0)
