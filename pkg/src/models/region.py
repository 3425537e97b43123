"""
Bounding boxes and detected regions.
"""

from typing import Any, Dict, Sequence, Tuple

import numpy as np

from src.core.errors.exceptions import ValidationError
from src.models.base_model import BaseModel
from src.utils.validators import Validators


class Box(BaseModel):
    """
    Axis-aligned box in pixel coordinates.

    Attributes:
        x1, y1: Top-left corner
        x2, y2: Bottom-right corner (x1 <= x2, y1 <= y2)
    """

    __slots__ = ('x1', 'y1', 'x2', 'y2')

    def __init__(self, x1: float, y1: float, x2: float, y2: float):
        self.x1 = float(x1)
        self.y1 = float(y1)
        self.x2 = float(x2)
        self.y2 = float(y2)
        self.validate()

    def validate(self) -> bool:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(np.isfinite(coords)):
            raise ValidationError("box coordinates must be finite", {'box': coords})
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValidationError("inverted box", {'box': coords})
        return True

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def inside(self, image_size: Sequence[float]) -> bool:
        """Whether the box lies within a (W, H) image."""
        width, height = image_size
        return self.x1 >= 0 and self.y1 >= 0 and self.x2 <= width and self.y2 <= height

    def to_dict(self) -> Dict[str, Any]:
        return {'bbox': list(self.as_tuple())}

    def to_list(self) -> list:
        return list(self.as_tuple())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Box':
        return cls.from_list(data.get('bbox'))

    @classmethod
    def from_list(cls, values: Any) -> 'Box':
        if not isinstance(values, (list, tuple)) or len(values) != 4:
            raise ValidationError("bbox must be [x1, y1, x2, y2]", {'bbox': values})
        return cls(*values)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Box) and self.as_tuple() == other.as_tuple()

    def __hash__(self) -> int:
        return hash(self.as_tuple())

    def __repr__(self) -> str:
        return f"Box({self.x1}, {self.y1}, {self.x2}, {self.y2})"


class Region(BaseModel):
    """
    One detected object region.

    Attributes:
        feat: Precomputed detector feature vector (float32)
        bbox: Box in pixels
        score: Detector confidence in [0, 1]
    """

    __slots__ = ('feat', 'bbox', 'score')

    def __init__(self, feat: Any, bbox: Box, score: float = 1.0):
        self.feat = np.asarray(feat, dtype=np.float32).reshape(-1)
        self.bbox = bbox if isinstance(bbox, Box) else Box.from_list(bbox)
        self.score = float(np.float32(score))
        self.validate()

    def validate(self) -> bool:
        if self.feat.size == 0 or not Validators.is_finite_array(self.feat):
            raise ValidationError("region feature must be a finite non-empty vector")
        if not Validators.is_in_range(self.score, 0.0, 1.0):
            raise ValidationError("region score must be in [0, 1]", {'score': self.score})
        return True

    @property
    def feature_dim(self) -> int:
        return int(self.feat.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'feat': [float(v) for v in self.feat],
            'bbox': self.bbox.to_list(),
            'score': self.score,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Region':
        if not Validators.has_required_keys(data, ['feat', 'bbox', 'score']):
            raise ValidationError("region requires feat, bbox and score", {'keys': list(data)})
        return cls(data['feat'], Box.from_list(data['bbox']), data['score'])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Region)
            and self.bbox == other.bbox
            and self.score == other.score
            and np.array_equal(self.feat, other.feat)
        )

    def __hash__(self) -> int:
        return hash((self.bbox, self.score, self.feat.tobytes()))

    def __repr__(self) -> str:
        return f"Region(bbox={self.bbox!r}, score={self.score:.3f}, dim={self.feature_dim})"
