"""CLI command handlers."""

from src.ui.commands.base_command import BaseCommand
from src.ui.commands.data_commands import DataCommands
from src.ui.commands.diagnostics_commands import DiagnosticsCommands
from src.ui.commands.eval_commands import EvalCommands
from src.ui.commands.model_commands import ModelCommands

__all__ = [
    'BaseCommand',
    'DataCommands',
    'DiagnosticsCommands',
    'EvalCommands',
    'ModelCommands',
]
