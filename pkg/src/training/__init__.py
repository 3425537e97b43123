"""
Training and evaluation: schedules, metrics, logs, checkpoints and loops.
"""

from src.training.checkpoint import load_checkpoint, restore_model, save_checkpoint
from src.training.config import EvalConfig, PretrainConfig, TrainConfig
from src.training.metrics import ConfusionMatrix, accuracy, evaluate, predict
from src.training.pretrainer import run_pretraining
from src.training.train_log import EvalRecord, TrainLog, select_final
from src.training.trainer import train

__all__ = [
    "load_checkpoint",
    "restore_model",
    "save_checkpoint",
    "EvalConfig",
    "PretrainConfig",
    "TrainConfig",
    "ConfusionMatrix",
    "accuracy",
    "evaluate",
    "predict",
    "run_pretraining",
    "EvalRecord",
    "TrainLog",
    "select_final",
    "train",
]
