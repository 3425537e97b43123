"""Gradient check command."""

import argparse

from src.ui.commands.base_command import BaseCommand, collect
from src.ui.commands.model_commands import MODEL_FLAGS


class DiagnosticsCommands(BaseCommand):
    """Handles ``grad-check``."""

    def run_grad_check(self, args: argparse.Namespace) -> int:
        """
        Check end-to-end gradients of a small model.

        Returns:
            0 if the maximum relative error is below the tolerance, else 1
        """
        try:
            service = self.create_service(args.config)
            report = service.grad_check(
                args.seed, collect(args, MODEL_FLAGS), args.max_entries, args.tolerance,
            )
            self.emit(report)
            if not report['passed']:
                self.logger.error(
                    f"Gradient check failed: {report['max_relative_error']:.3e} "
                    f">= {report['tolerance']:.1e}"
                )
                return 1
            return 0
        except Exception as e:
            return self.handle_error(e, "Gradient check failed")
