"""
Box overlap.
"""

from typing import Sequence, Union

from src.models.region import Box

BoxLike = Union[Box, Sequence[float]]


def to_box(value: BoxLike) -> Box:
    """Accept a Box or an (x1, y1, x2, y2) sequence (validated)."""
    return value if isinstance(value, Box) else Box.from_list(list(value))


def iou(a: BoxLike, b: BoxLike) -> float:
    """
    Intersection over union of two boxes.

    Returns 0 when the union has zero area.

    Raises:
        ValidationError: If either box is inverted or malformed
    """
    a, b = to_box(a), to_box(b)
    inter_w = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    inter_h = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    inter = inter_w * inter_h
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)
