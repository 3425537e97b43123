"""Base command handler with common functionality."""

import argparse
import sys
from typing import Any, Callable, Dict, Optional

from src.core.errors.error_handler import describe
from src.data.jsonl_io import dump_json
from src.services.pipeline_service import PipelineService


def collect(args: argparse.Namespace, mapping: Dict[str, str]) -> Dict[str, Any]:
    """
    Gather flag values into a config override mapping.

    Args:
        args: Parsed arguments
        mapping: Attribute name on ``args`` -> config field name

    Returns:
        Overrides for flags that were given
    """
    values = {}
    for attr, name in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            values[name] = value
    return values


class BaseCommand:
    """Base class for CLI command handlers."""

    def __init__(self, service_factory: Callable[[Optional[str]], PipelineService], logger):
        """
        Initialize command handler.

        Args:
            service_factory: Callable that builds a PipelineService from an
                optional config file path
            logger: Logger instance
        """
        self.create_service = service_factory
        self.logger = logger

    @staticmethod
    def emit(data: Any) -> None:
        """Write one JSON document to stdout."""
        print(dump_json(data))
        sys.stdout.flush()

    def handle_error(self, error: Exception, context: str) -> int:
        """
        Print a one-line diagnostic on stderr and log the failure.

        Args:
            error: Exception that occurred
            context: What the command was doing

        Returns:
            Exit code 1
        """
        print(f"tdu: {context}: {describe(error)}", file=sys.stderr)
        self.logger.error(f"{context}: {error}")
        return 1
