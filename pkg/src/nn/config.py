"""
Model shape configuration.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Dict

from src.core.errors.exceptions import ValidationError

EARLY_FUSION = 'early'
LATE_FUSION = 'late'
FUSION_MODES = (EARLY_FUSION, LATE_FUSION)
LOCATION_DIM = 7


@dataclass(frozen=True)
class ModelConfig:
    """
    Shape and regularisation of a Target-dependent UNITER model.

    The classification head always reads the final-layer vector at the
    target slot. ``vocab_size`` and ``feature_dim`` come from the data.

    Attributes:
        num_layers: Transformer layers (L)
        hidden_size: Hidden width (H)
        num_heads: Attention heads (A); must divide H
        dropout: Dropout rate inside transformer layers
        max_positions: Maximum text tokens (P)
        max_contexts: Maximum context regions per sample (N_max)
        ffn_multiplier: FFN inner width as a multiple of H
        fusion: 'early' (one joint stack) or 'late' (separate target stack)
        layer_norm_eps: Epsilon of every normalisation layer
        init_std: Standard deviation of the truncated-normal initialiser
        vocab_size: Vocabulary size (V)
        feature_dim: Region feature size (D)
    """

    num_layers: int = 2
    hidden_size: int = 768
    num_heads: int = 12
    dropout: float = 0.1
    max_positions: int = 32
    max_contexts: int = 16
    ffn_multiplier: int = 4
    fusion: str = EARLY_FUSION
    layer_norm_eps: float = 1e-12
    init_std: float = 0.02
    vocab_size: int = 64
    feature_dim: int = 19

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ValidationError: If a size is not positive, H is not divisible
                by A, or the fusion mode is unknown
        """
        positive = (
            'num_layers', 'hidden_size', 'num_heads', 'max_positions',
            'max_contexts', 'ffn_multiplier', 'vocab_size', 'feature_dim'
        )
        for name in positive:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValidationError(f"{name} must be a positive integer", {name: value})
        if self.hidden_size % self.num_heads != 0:
            raise ValidationError(
                "hidden_size must be divisible by num_heads",
                {'hidden_size': self.hidden_size, 'num_heads': self.num_heads}
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must be in [0, 1)", {'dropout': self.dropout})
        if self.fusion not in FUSION_MODES:
            raise ValidationError(f"unknown fusion mode: {self.fusion}", {'fusion': self.fusion})
        if self.fusion == LATE_FUSION and self.num_layers < 2:
            raise ValidationError("late fusion needs at least two layers to split")
        if self.layer_norm_eps < 0 or self.init_std <= 0:
            raise ValidationError("layer_norm_eps and init_std out of range")

    @property
    def head_dim(self) -> int:
        """d_k = H / A."""
        return self.hidden_size // self.num_heads

    @property
    def ffn_size(self) -> int:
        return self.hidden_size * self.ffn_multiplier

    @property
    def max_sequence(self) -> int:
        """Longest fused sequence: text, target slot and contexts."""
        return self.max_positions + self.max_contexts + 1

    @property
    def late_split(self) -> int:
        """Layers given to the text/context stack under late fusion."""
        return math.ceil(self.num_layers / 2)

    def replace(self, **changes: Any) -> 'ModelConfig':
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelConfig':
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError("unknown model config keys", {'unknown': unknown})
        return cls(**data)
