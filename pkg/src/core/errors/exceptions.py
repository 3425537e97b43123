"""
Custom exception classes for the application.
Provides a hierarchy of exceptions for different error scenarios.
"""

from typing import Optional, Sequence


class BaseApplicationError(Exception):
    """
    Base exception class for all application errors.

    All custom exceptions should inherit from this class.
    """

    def __init__(self, message: str, details: Optional[dict] = None):
        """
        Initialize the exception.

        Args:
            message: Error message
            details: Additional error details
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.details:
            return f"{self.message} (details: {self.details})"
        return self.message


class ConfigurationError(BaseApplicationError):
    """Raised when there's a configuration-related error."""
    pass


class ValidationError(BaseApplicationError):
    """Raised when data validation fails."""
    pass


class DataError(BaseApplicationError):
    """Raised when a dataset cannot be generated, read or preprocessed."""
    pass


class DimensionError(BaseApplicationError):
    """Raised when tensor shapes are incompatible."""

    def __init__(
        self,
        message: str,
        left: Sequence[int],
        right: Sequence[int],
        details: Optional[dict] = None
    ):
        details = dict(details or {})
        details.update({'left_shape': tuple(left), 'right_shape': tuple(right)})
        super().__init__(
            f"{message}: {tuple(left)} vs {tuple(right)}",
            details
        )
        self.left = tuple(left)
        self.right = tuple(right)


class NumericalError(BaseApplicationError):
    """Raised in checked mode when an operation produces NaN or infinity."""
    pass


class GradientError(BaseApplicationError):
    """Raised when the autodiff tape is misused."""
    pass


class TrainingDivergedError(BaseApplicationError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, step: int, loss: float):
        super().__init__(
            f"Non-finite training loss at step {step}",
            {'step': step, 'loss': loss}
        )
        self.step = step


class CheckpointError(BaseApplicationError):
    """Base class for checkpoint read/write failures."""
    pass


class CheckpointVersionError(CheckpointError):
    """Raised when a checkpoint has an unsupported format version."""
    pass


class CheckpointTruncatedError(CheckpointError):
    """Raised when a checkpoint payload is shorter or longer than its manifest."""
    pass


class CheckpointShapeError(CheckpointError):
    """Raised when checkpoint tensors disagree with the model's parameters."""
    pass
