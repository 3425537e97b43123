"""Pretraining, fine-tuning and ablation commands."""

import argparse

from src.ui.commands.base_command import BaseCommand, collect

MODEL_FLAGS = {
    'layers': 'num_layers',
    'hidden': 'hidden_size',
    'heads': 'num_heads',
    'dropout': 'dropout',
    'fusion': 'fusion',
    'max_positions': 'max_positions',
    'max_contexts': 'max_contexts',
}
TRAIN_FLAGS = {
    'steps': 'steps',
    'batch_size': 'batch_size',
    'lr': 'lr',
    'weight_decay': 'weight_decay',
    'eval_every': 'eval_every',
}
PRETRAIN_FLAGS = {
    'steps': 'steps',
    'batch_size': 'batch_size',
    'lr': 'lr',
    'mlm_rate': 'mlm_rate',
}
ABLATE_PRETRAIN_FLAGS = {
    'pretrain_steps': 'steps',
}
EVAL_FLAGS = {
    'threshold': 'threshold',
    'eval_batch_size': 'batch_size',
    'max_workers': 'max_workers',
}


class ModelCommands(BaseCommand):
    """Handles ``pretrain``, ``train`` and ``ablate``."""

    def run_pretrain(self, args: argparse.Namespace) -> int:
        """
        Pretrain with MLM and ITM and save the weights.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            result = service.pretrain(
                args.data, args.out, args.seed,
                collect(args, MODEL_FLAGS), collect(args, PRETRAIN_FLAGS),
            )
            self.emit(result)
            return 0
        except Exception as e:
            return self.handle_error(e, "Pretraining failed")

    def run_train(self, args: argparse.Namespace) -> int:
        """
        Fine-tune and print the best-validation summary.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            summary = service.train(
                args.data, args.out, args.seed,
                collect(args, MODEL_FLAGS), collect(args, TRAIN_FLAGS), collect(args, EVAL_FLAGS),
                init_checkpoint=args.init, resume=args.resume,
            )
            self.emit(summary)
            return 0
        except Exception as e:
            return self.handle_error(e, "Training failed")

    def run_ablate(self, args: argparse.Namespace) -> int:
        """
        Run one ablation variant.

        Returns:
            Exit code (0 for success)
        """
        try:
            service = self.create_service(args.config)
            result = service.ablate(
                args.variant, args.data, args.out, args.seed,
                collect(args, MODEL_FLAGS), collect(args, TRAIN_FLAGS),
                collect(args, ABLATE_PRETRAIN_FLAGS), collect(args, EVAL_FLAGS),
            )
            self.emit(result)
            return 0
        except Exception as e:
            return self.handle_error(e, f"Ablation '{args.variant}' failed")
