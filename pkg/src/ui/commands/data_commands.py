"""Dataset generation and preprocessing commands."""

import argparse

from src.ui.commands.base_command import BaseCommand, collect

DATA_FLAGS = {
    'n_scenes': 'n_scenes',
    'objects_per_scene': 'objects_per_scene',
    'instructions_per_scene': 'instructions_per_scene',
    'feature_noise': 'feature_noise',
    'vocab_size': 'vocab_size',
}


class DataCommands(BaseCommand):
    """Handles ``gen-data`` and ``preprocess``."""

    def run_gen_data(self, args: argparse.Namespace) -> int:
        """
        Generate a synthetic data directory.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            self.emit(service.generate_data(args.out, args.seed, collect(args, DATA_FLAGS)))
            return 0
        except Exception as e:
            return self.handle_error(e, "Failed to generate data")

    def run_preprocess(self, args: argparse.Namespace) -> int:
        """
        Label and balance a scene file.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            self.emit(service.preprocess(args.scenes, args.out, args.seed, args.max_contexts))
            return 0
        except Exception as e:
            return self.handle_error(e, f"Failed to preprocess {args.scenes}")
