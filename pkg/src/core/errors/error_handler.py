"""
Centralised reporting of failures.

Services route every caught exception through :class:`ErrorHandler`, which
logs one structured record per failure according to the
``error_handling.*`` config keys. :func:`describe` renders the single-line
diagnostic the CLI prints on stderr.
"""

import json
import traceback
from typing import Any, Callable, Dict, Optional, TypeVar

from src.core.config.config_manager import ConfigManager
from src.core.errors.exceptions import BaseApplicationError
from src.core.logging.logger import Logger

T = TypeVar('T')


def error_record(
    error: BaseException,
    context: Optional[Dict[str, Any]] = None,
    with_traceback: bool = False
) -> Dict[str, Any]:
    """
    Structured view of an exception.

    Args:
        error: Exception to describe
        context: Where it happened (paths, step, variant, ...)
        with_traceback: Attach the formatted traceback when one exists

    Returns:
        Dict with ``type``, ``message``, ``context`` and, for application
        errors, ``details``
    """
    record: Dict[str, Any] = {
        'type': type(error).__name__,
        'message': getattr(error, 'message', None) or str(error),
        'context': dict(context or {}),
    }
    if isinstance(error, BaseApplicationError):
        record['details'] = error.details
    if with_traceback and error.__traceback__ is not None:
        record['traceback'] = ''.join(
            traceback.format_exception(type(error), error, error.__traceback__)
        )
    return record


def describe(error: BaseException) -> str:
    """One-line diagnostic: ``Type: message {details}``."""
    line = f"{type(error).__name__}: {getattr(error, 'message', None) or error}"
    if isinstance(error, BaseApplicationError) and error.details:
        line += ' ' + json.dumps(error.details, default=str, sort_keys=True)
    return line


class ErrorHandler:
    """Logs failures and decides whether they propagate."""

    def __init__(self, logger_name: str = __name__):
        self.logger = Logger.get_logger(logger_name)
        self.config = ConfigManager()

    def handle_error(
        self,
        error: Exception,
        context: Optional[Dict[str, Any]] = None,
        reraise: bool = False
    ) -> None:
        """
        Log ``error`` and re-raise it when asked to.

        Application errors are also re-raised when
        ``error_handling.raise_on_critical`` is set.

        Args:
            error: Caught exception
            context: Extra fields for the log record
            reraise: Propagate after logging
        """
        if self.config.get('error_handling.log_errors', True):
            record = error_record(
                error, context,
                with_traceback=bool(self.config.get('error_handling.include_traceback', True))
            )
            trace = record.pop('traceback', None)
            self.logger.error(f"{record['type']} in {record['context'] or 'unknown context'}: "
                              f"{record['message']} {record.get('details', '')}".rstrip())
            if trace:
                self.logger.debug(trace)

        if reraise or (
            isinstance(error, BaseApplicationError)
            and self.config.get('error_handling.raise_on_critical', False)
        ):
            raise error

    @staticmethod
    def safe_execute(
        func: Callable[..., T],
        *args: Any,
        default: Optional[T] = None,
        logger_name: str = __name__,
        **kwargs: Any
    ) -> Optional[T]:
        """
        Call ``func`` and return ``default`` if it raises.

        Used for optional inputs such as a data directory's ``meta.json``,
        whose absence or corruption only loses a shortcut.

        Returns:
            ``func(*args, **kwargs)`` or ``default``
        """
        try:
            return func(*args, **kwargs)
        except Exception as e:
            ErrorHandler(logger_name).handle_error(
                e, context={'function': getattr(func, '__name__', repr(func))}
            )
            return default
