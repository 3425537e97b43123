"""
Typed configuration of fine-tuning, pretraining and evaluation.

Defaults reproduce the published schedule; the YAML ``training``,
``pretraining`` and ``evaluation`` sections use the same field names.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict

from src.core.errors.exceptions import ValidationError
from src.numerics.optim import AdamWHyper


def _require_positive(config: Any, names: tuple) -> None:
    for name in names:
        value = getattr(config, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise ValidationError(f"{name} must be positive", {name: value})


@dataclass(frozen=True)
class TrainConfig:
    """
    Fine-tuning schedule.

    Attributes:
        lr: AdamW learning rate
        beta1, beta2, eps: AdamW moment parameters
        weight_decay: Decoupled weight decay
        steps: Optimisation steps, one batch each
        batch_size: Samples per step
        eval_every: Evaluate and checkpoint every this many steps
        seed: Seed of shuffling and dropout streams
    """

    lr: float = 8e-5
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-8
    weight_decay: float = 0.01
    steps: int = 20000
    batch_size: int = 8
    eval_every: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        _require_positive(self, ('lr', 'eps', 'steps', 'batch_size', 'eval_every'))
        if self.eval_every > self.steps:
            raise ValidationError(
                "eval_every must not exceed steps",
                {'eval_every': self.eval_every, 'steps': self.steps}
            )
        self.hyper()

    def hyper(self) -> AdamWHyper:
        return AdamWHyper(self.lr, self.beta1, self.beta2, self.eps, self.weight_decay)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PretrainConfig:
    """
    MLM + ITM pretraining schedule.

    Attributes:
        steps: Optimisation steps
        batch_size: Image-text pairs per step
        lr, beta1, beta2, eps, weight_decay: AdamW settings
        mlm_rate: Probability of selecting a token for MLM
        itm_corrupt_prob: Probability of swapping in a foreign instruction
        seed: Seed of pair sampling, masking and dropout streams
    """

    steps: int = 2000
    batch_size: int = 8
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-8
    weight_decay: float = 0.01
    mlm_rate: float = 0.15
    itm_corrupt_prob: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        _require_positive(self, ('steps', 'batch_size', 'lr', 'eps'))
        for name in ('mlm_rate', 'itm_corrupt_prob'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]", {name: value})
        self.hyper()

    def hyper(self) -> AdamWHyper:
        return AdamWHyper(self.lr, self.beta1, self.beta2, self.eps, self.weight_decay)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EvalConfig:
    """
    Attributes:
        threshold: Predict "target" iff p(correct) >= threshold
        batch_size: Samples per inference batch
        max_workers: Threads scoring batches concurrently
    """

    threshold: float = 0.5
    batch_size: int = 32
    max_workers: int = 1

    def __post_init__(self) -> None:
        _require_positive(self, ('batch_size', 'max_workers'))
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError("threshold must be in [0, 1]", {'threshold': self.threshold})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
