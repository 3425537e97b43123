"""Evaluation and prediction commands."""

import argparse

from src.data.jsonl_io import write_records
from src.ui.commands.base_command import BaseCommand, collect
from src.ui.commands.model_commands import EVAL_FLAGS


class EvalCommands(BaseCommand):
    """Handles ``eval`` and ``predict``."""

    def run_eval(self, args: argparse.Namespace) -> int:
        """
        Print the confusion counts and accuracy of a checkpoint.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            self.emit(service.evaluate(args.checkpoint, args.data, args.split, collect(args, EVAL_FLAGS)))
            return 0
        except Exception as e:
            return self.handle_error(e, f"Evaluation of {args.checkpoint} failed")

    def run_predict(self, args: argparse.Namespace) -> int:
        """
        Print one JSON record per sample, or write them to ``--out``.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            records = service.predict(args.checkpoint, args.data, args.split, collect(args, EVAL_FLAGS))
            if args.out:
                count = write_records(args.out, records)
                self.emit({'out': args.out, 'n': count})
            else:
                for record in records:
                    self.emit(record)
            return 0
        except Exception as e:
            return self.handle_error(e, f"Prediction with {args.checkpoint} failed")
