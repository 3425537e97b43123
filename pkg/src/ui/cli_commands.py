"""
CLI Command Dispatcher.

Delegates commands to specialized handlers organized by pipeline stage.
"""

import argparse

from src.ui.commands import (
    DataCommands,
    DiagnosticsCommands,
    EvalCommands,
    ModelCommands,
)


class CLICommands:
    """Command dispatcher for the ``tdu`` tool."""

    def __init__(self, service_factory, logger):
        """
        Initialize CLI command dispatcher.

        Args:
            service_factory: Callable that builds a PipelineService
            logger: Logger instance
        """
        self.data_commands = DataCommands(service_factory, logger)
        self.model_commands = ModelCommands(service_factory, logger)
        self.eval_commands = EvalCommands(service_factory, logger)
        self.diagnostics_commands = DiagnosticsCommands(service_factory, logger)

    def run_gen_data(self, args: argparse.Namespace) -> int:
        """Generate a synthetic dataset."""
        return self.data_commands.run_gen_data(args)

    def run_preprocess(self, args: argparse.Namespace) -> int:
        """Label and balance scenes."""
        return self.data_commands.run_preprocess(args)

    def run_pretrain(self, args: argparse.Namespace) -> int:
        """Pretrain with MLM and ITM."""
        return self.model_commands.run_pretrain(args)

    def run_train(self, args: argparse.Namespace) -> int:
        """Fine-tune a model."""
        return self.model_commands.run_train(args)

    def run_eval(self, args: argparse.Namespace) -> int:
        """Evaluate a checkpoint."""
        return self.eval_commands.run_eval(args)

    def run_predict(self, args: argparse.Namespace) -> int:
        """Score samples with a checkpoint."""
        return self.eval_commands.run_predict(args)

    def run_ablate(self, args: argparse.Namespace) -> int:
        """Run an ablation variant."""
        return self.model_commands.run_ablate(args)

    def run_grad_check(self, args: argparse.Namespace) -> int:
        """Check gradients end to end."""
        return self.diagnostics_commands.run_grad_check(args)
