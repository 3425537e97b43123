"""
Base model class providing common functionality.
All domain records should inherit from this class.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict


class BaseModel(ABC):
    """
    Abstract base class for validated domain records.

    Subclasses validate themselves on construction and convert to and from
    the plain dictionaries written to JSONL files.
    """

    @abstractmethod
    def validate(self) -> bool:
        """
        Validate the record's data.

        Returns:
            True if validation passes

        Raises:
            ValidationError: If validation fails
        """
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the record to a JSON-serialisable dictionary.

        Returns:
            Dictionary representation of the record
        """
        pass

    @classmethod
    @abstractmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BaseModel':
        """
        Build a record from its dictionary representation.

        Raises:
            ValidationError: If required keys are missing or invalid
        """
        pass

    def __repr__(self) -> str:
        """Return string representation of the record."""
        return f"{self.__class__.__name__}()"
