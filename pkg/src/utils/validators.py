"""
Validation helpers shared by the record types and loaders.
"""

import re
from typing import Any, Iterable

import numpy as np

_ID_PATTERN = re.compile(r'[A-Za-z0-9_-]+')


class Validators:
    """Predicates used by record validation; none of them raise."""

    @staticmethod
    def is_valid_id(value: Any) -> bool:
        """Scene and sample ids: letters, digits, '-' and '_' only."""
        return isinstance(value, str) and _ID_PATTERN.fullmatch(value) is not None

    @staticmethod
    def is_in_range(value: Any, min_val: float, max_val: float) -> bool:
        """
        Whether a real number lies in ``[min_val, max_val]``.

        Booleans are rejected even though Python treats them as ints.
        """
        if isinstance(value, bool) or not isinstance(value, (int, float, np.number)):
            return False
        return min_val <= value <= max_val

    @staticmethod
    def has_required_keys(data: Any, required_keys: Iterable[str]) -> bool:
        """Whether ``data`` is a dict holding every key of a JSONL record schema."""
        return isinstance(data, dict) and all(key in data for key in required_keys)

    @staticmethod
    def is_finite_array(value: Any) -> bool:
        """
        Check that every element of an array-like is finite.

        Args:
            value: Array-like to check

        Returns:
            True if no element is NaN or infinite
        """
        try:
            return bool(np.all(np.isfinite(np.asarray(value, dtype=np.float64))))
        except (TypeError, ValueError):
            return False

    @staticmethod
    def is_image_size(value: Any) -> bool:
        """
        Check that value is a (width, height) pair of positive numbers.

        Args:
            value: Value to check

        Returns:
            True if value is a valid image size
        """
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            return False
        return all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0
            for v in value
        )
