"""
UI Package.

Command-line interface over the pipeline service.
"""

from src.ui.cli import TduCLI, main, parse_args

__all__ = [
    "TduCLI",
    "main",
    "parse_args",
]
