"""
Learnable parameter containers and their initialisation.

Containers are plain dataclasses holding :class:`Tensor` leaves. Parameter
names are dotted paths through the containers (``layers.0.attn.W_q``), and
:func:`named_parameters` walks them in declaration order, which is also the
order used by checkpoints.
"""

import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from src.nn.config import LATE_FUSION, LOCATION_DIM, ModelConfig
from src.numerics import ops
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor, get_default_dtype


@dataclass
class LinearParams:
    W: Tensor
    b: Optional[Tensor] = None

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.W, self.b)


@dataclass
class LayerNormParams:
    gain: Tensor
    bias: Tensor

    def __call__(self, x: Tensor, eps: float) -> Tensor:
        return ops.layer_norm(x, self.gain, self.bias, eps)


@dataclass
class TextEmbedderParams:
    """Word table W_inst [V, H], position table W_pos [P, H], fc 2H->H, norm."""

    W_inst: Tensor
    W_pos: Tensor
    fc: LinearParams
    norm: LayerNormParams


@dataclass
class ImageEmbedderParams:
    """fc_feat D->H, fc_loc 7->H, fc_out 2H->H, norm."""

    fc_feat: LinearParams
    fc_loc: LinearParams
    fc_out: LinearParams
    norm: LayerNormParams


@dataclass
class AttentionParams:
    """Bias-free Q/K/V projections split into ``num_heads`` heads, and W_o."""

    W_q: Tensor
    W_k: Tensor
    W_v: Tensor
    W_o: LinearParams
    num_heads: int


@dataclass
class TransformerLayerParams:
    attn: AttentionParams
    norm1: LayerNormParams
    ffn_in: LinearParams
    ffn_out: LinearParams
    norm2: LayerNormParams


@dataclass
class ModelParams:
    """
    Every learnable tensor of the model.

    ``fusion`` is present only under late fusion. ``mlm`` and ``itm`` are the
    pretraining heads; they are saved with the model but unused when
    fine-tuning.
    """

    text: TextEmbedderParams
    image: ImageEmbedderParams
    layers: List[TransformerLayerParams]
    head: LinearParams
    mlm: LinearParams
    itm: LinearParams
    fusion: Optional[LinearParams] = None


def _walk(node: Any, prefix: str) -> Iterator[Tuple[str, Tensor]]:
    if isinstance(node, Tensor):
        yield prefix, node
    elif isinstance(node, list):
        for i, item in enumerate(node):
            yield from _walk(item, f"{prefix}.{i}" if prefix else str(i))
    elif dataclasses.is_dataclass(node):
        for f in dataclasses.fields(node):
            child = getattr(node, f.name)
            if child is None:
                continue
            yield from _walk(child, f"{prefix}.{f.name}" if prefix else f.name)


def named_parameters(params: Any, prefix: str = '') -> Dict[str, Tensor]:
    """Ordered mapping of dotted name to tensor for a container tree."""
    return dict(_walk(params, prefix))


def count_parameters(params: Any) -> int:
    return sum(t.size for t in named_parameters(params).values())


def cast_parameters(params: Any, dtype: Union[str, np.dtype]) -> None:
    """Convert every tensor of a container tree to ``dtype`` in place."""
    for tensor in named_parameters(params).values():
        tensor.data = tensor.data.astype(dtype)
        tensor.grad = None


class _Initializer:
    """Draws each tensor from a stream forked on its own name."""

    def __init__(self, config: ModelConfig, rng: PrngState):
        self.config = config
        self.rng = rng
        self.dtype = get_default_dtype()

    def weight(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        values = self.rng.fork(name).truncated_normal(
            shape, std=self.config.init_std, bound=2.0, dtype=self.dtype
        )
        return Tensor(values, requires_grad=True, name=name)

    def zeros(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return Tensor(np.zeros(shape, dtype=self.dtype), requires_grad=True, name=name)

    def ones(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return Tensor(np.ones(shape, dtype=self.dtype), requires_grad=True, name=name)

    def linear(self, name: str, d_in: int, d_out: int, bias: bool = True) -> LinearParams:
        b = self.zeros(f"{name}.b", (d_out,)) if bias else None
        return LinearParams(self.weight(f"{name}.W", (d_in, d_out)), b)

    def norm(self, name: str, size: int) -> LayerNormParams:
        return LayerNormParams(self.ones(f"{name}.gain", (size,)), self.zeros(f"{name}.bias", (size,)))

    def layer(self, name: str) -> TransformerLayerParams:
        H = self.config.hidden_size
        attn = AttentionParams(
            self.weight(f"{name}.attn.W_q", (H, H)),
            self.weight(f"{name}.attn.W_k", (H, H)),
            self.weight(f"{name}.attn.W_v", (H, H)),
            self.linear(f"{name}.attn.W_o", H, H),
            self.config.num_heads,
        )
        return TransformerLayerParams(
            attn,
            self.norm(f"{name}.norm1", H),
            self.linear(f"{name}.ffn_in", H, self.config.ffn_size),
            self.linear(f"{name}.ffn_out", self.config.ffn_size, H),
            self.norm(f"{name}.norm2", H),
        )


def init_model_params(config: ModelConfig, rng: PrngState) -> ModelParams:
    """
    Initialise all parameters.

    Weights are truncated normal (std ``init_std``, redrawn beyond 2 std),
    biases zero and layer-norm gains one. Each tensor uses a stream forked on
    its name, so adding a tensor never changes the values of the others.

    Args:
        config: Model shape
        rng: Root stream

    Returns:
        ModelParams in the current default dtype
    """
    init = _Initializer(config, rng)
    H = config.hidden_size
    text = TextEmbedderParams(
        init.weight('text.W_inst', (config.vocab_size, H)),
        init.weight('text.W_pos', (config.max_positions, H)),
        init.linear('text.fc', 2 * H, H),
        init.norm('text.norm', H),
    )
    image = ImageEmbedderParams(
        init.linear('image.fc_feat', config.feature_dim, H),
        init.linear('image.fc_loc', LOCATION_DIM, H),
        init.linear('image.fc_out', 2 * H, H),
        init.norm('image.norm', H),
    )
    layers = [init.layer(f"layers.{i}") for i in range(config.num_layers)]
    fusion = init.linear('fusion', 2 * H, H) if config.fusion == LATE_FUSION else None
    return ModelParams(
        text=text,
        image=image,
        layers=layers,
        head=init.linear('head', H, 2),
        mlm=init.linear('mlm', H, config.vocab_size),
        itm=init.linear('itm', H, 2),
        fusion=fusion,
    )
