"""
Command-line interface of the target-dependent grounding pipeline.

Every subcommand prints machine-readable JSON on stdout; logs go to stderr.
Exit codes: 0 success, 1 runtime failure (or a failed gradient check),
2 usage error, 130 interrupted.
"""

import argparse
import sys
from typing import List, Optional

from src.core.config.config_manager import ConfigManager
from src.core.logging.logger import Logger
from src.nn.config import FUSION_MODES
from src.services.pipeline_service import ABLATION_VARIANTS, PipelineService
from src.ui.cli_commands import CLICommands

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class TduCLI:
    """
    Command line interface over the pipeline service.

    Builds a fresh PipelineService per command so ``--config`` applies.
    """

    def __init__(self):
        """Initialize the CLI."""
        self.logger = Logger.get_logger("tdu")
        self.commands = CLICommands(self.create_service, self.logger)
        self.handlers = {
            'gen-data': self.commands.run_gen_data,
            'preprocess': self.commands.run_preprocess,
            'pretrain': self.commands.run_pretrain,
            'train': self.commands.run_train,
            'eval': self.commands.run_eval,
            'predict': self.commands.run_predict,
            'ablate': self.commands.run_ablate,
            'grad-check': self.commands.run_grad_check,
        }

    def create_service(self, config_path: Optional[str] = None) -> PipelineService:
        """
        Create a pipeline service.

        Args:
            config_path: Optional JSON/YAML file overriding configuration

        Returns:
            Configured service
        """
        return PipelineService(ConfigManager.load_file(config_path))

    def run(self, args: argparse.Namespace) -> int:
        """Dispatch parsed arguments to their command handler."""
        if args.log_level:
            Logger.set_level(args.log_level)
        if args.seed is None:
            args.seed = ConfigManager().default_seed()
        return self.handlers[args.command](args)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--layers", type=int, help="Transformer layers")
    group.add_argument("--hidden", type=int, help="Hidden size")
    group.add_argument("--heads", type=int, help="Attention heads")
    group.add_argument("--dropout", type=float, help="Dropout probability")
    group.add_argument("--fusion", choices=FUSION_MODES, help="Fusion mode")
    group.add_argument("--max-positions", type=int, help="Maximum text tokens")
    group.add_argument("--max-contexts", type=int, help="Maximum context regions")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--steps", type=int, help="Optimisation steps")
    group.add_argument("--batch-size", type=int, help="Samples per step")
    group.add_argument("--lr", type=float, help="Learning rate")
    group.add_argument("--weight-decay", type=float, help="AdamW weight decay")
    group.add_argument("--eval-every", type=int, help="Evaluate every N steps")


def _add_eval_flags(parser: argparse.ArgumentParser, batch_flag: str = "--batch-size") -> None:
    group = parser.add_argument_group("evaluation")
    group.add_argument("--threshold", type=float, help="Decision threshold on p(correct)")
    group.add_argument(batch_flag, dest="eval_batch_size", type=int, help="Samples per inference batch")
    group.add_argument("--max-workers", type=int, help="Threads scoring batches")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per pipeline stage."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML file overriding configuration")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="Log level for stderr")
    common.add_argument("--seed", type=int, help="Root seed (default: TDU_SEED or app.seed)")

    parser = argparse.ArgumentParser(
        prog="tdu",
        description="Target-dependent visual grounding: data, training and evaluation",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    gen = subparsers.add_parser("gen-data", parents=[common], help="Generate a synthetic dataset")
    gen.add_argument("--out", required=True, help="Output data directory")
    gen.add_argument("--n-scenes", type=int, help="Number of scenes")
    gen.add_argument("--objects-per-scene", type=int, help="Objects per scene")
    gen.add_argument("--instructions-per-scene", type=int, help="Instructions per scene")
    gen.add_argument("--feature-noise", type=float, help="Std of feature noise")
    gen.add_argument("--vocab-size", type=int, help="Target vocabulary size")

    pre = subparsers.add_parser("preprocess", parents=[common], help="Label and balance scenes")
    pre.add_argument("--scenes", required=True, help="scenes.jsonl to read")
    pre.add_argument("--out", required=True, help="Output data directory")
    pre.add_argument("--max-contexts", type=int, help="Keep at most N detections per sample")

    pretrain = subparsers.add_parser("pretrain", parents=[common], help="Pretrain with MLM and ITM")
    pretrain.add_argument("--data", required=True, help="Data directory")
    pretrain.add_argument("--out", required=True, help="Checkpoint file to write")
    pretrain.add_argument("--steps", type=int, help="Pretraining steps")
    pretrain.add_argument("--batch-size", type=int, help="Pairs per step")
    pretrain.add_argument("--lr", type=float, help="Learning rate")
    pretrain.add_argument("--mlm-rate", type=float, help="Token selection rate for MLM")
    _add_model_flags(pretrain)

    train = subparsers.add_parser("train", parents=[common], help="Fine-tune a model")
    train.add_argument("--data", required=True, help="Data directory")
    train.add_argument("--out", required=True, help="Run directory")
    train.add_argument("--init", help="Pretrained checkpoint to start from")
    train.add_argument("--resume", help="Checkpoint of this run to continue from")
    _add_model_flags(train)
    _add_train_flags(train)
    _add_eval_flags(train, "--eval-batch-size")

    for name, help_text in (("eval", "Evaluate a checkpoint"), ("predict", "Score samples")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--checkpoint", required=True, help="Checkpoint file")
        sub.add_argument("--data", required=True, help="Data directory or sample file")
        sub.add_argument("--split", default="test", help="Split to use when --data is a directory")
        _add_eval_flags(sub)
        if name == "predict":
            sub.add_argument("--out", help="Write records to this JSONL file instead of stdout")

    ablate = subparsers.add_parser("ablate", parents=[common], help="Run an ablation variant")
    ablate.add_argument("--variant", required=True, choices=ABLATION_VARIANTS, help="Variant to run")
    ablate.add_argument("--data", required=True, help="Data directory")
    ablate.add_argument("--out", required=True, help="Run directory")
    ablate.add_argument("--pretrain-steps", type=int, help="Pretraining steps")
    _add_model_flags(ablate)
    _add_train_flags(ablate)
    _add_eval_flags(ablate, "--eval-batch-size")

    grad = subparsers.add_parser("grad-check", parents=[common], help="Verify gradients numerically")
    grad.add_argument("--layers", type=int, help="Transformer layers")
    grad.add_argument("--hidden", type=int, help="Hidden size")
    grad.add_argument("--heads", type=int, help="Attention heads")
    grad.add_argument("--fusion", choices=FUSION_MODES, help="Fusion mode")
    grad.add_argument("--max-entries", type=int, help="Entries sampled per tensor (default: all)")
    grad.add_argument("--tolerance", type=float, default=1e-5, help="Maximum relative error")

    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Raises:
        SystemExit: With code 2 on usage errors (0 for --help)
    """
    return build_parser().parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = parse_args(argv)
    cli = TduCLI()
    try:
        return cli.run(args)
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
