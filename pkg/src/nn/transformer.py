"""
Multi-head self-attention and the transformer encoder stack.

Inputs are either a single sequence [S, H] or a padded batch [B, S, H] with a
boolean key mask ([S] or [B, S]; True = attendable). Each layer is

    u   = norm1(h + dropout(W_o(attention(h))))
    out = norm2(u + dropout(ffn_out(gelu(ffn_in(u)))))

Region slots carry no positional embedding, so the encoder is equivariant to
the order of context slots.
"""

import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors.exceptions import DimensionError
from src.nn.params import AttentionParams, TransformerLayerParams
from src.numerics import ops
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor

Mask = Optional[np.ndarray]


def _batched(h: Tensor, mask: Mask) -> Tuple[Tensor, np.ndarray, bool]:
    """Promote a single sequence to a batch of one and default the mask."""
    single = h.ndim == 2
    if single:
        h = ops.reshape(h, (1,) + h.shape)
    if mask is None:
        mask = np.ones(h.shape[:2], dtype=bool)
    mask = np.asarray(mask, dtype=bool).reshape(h.shape[:2])
    return h, mask, single


def attention_probabilities(
    h: Tensor,
    params: AttentionParams,
    mask: Mask = None
) -> Tuple[Tensor, Tensor]:
    """
    Per-head attention weights and projected values.

    Returns:
        (probs [B, A, S, S], values [B, A, S, d_k]); masked keys get weight 0

    Raises:
        DimensionError: If H is not divisible by the head count
        ValidationError: If a row has no attendable key
    """
    h, mask, _ = _batched(h, mask)
    batch, seq, hidden = h.shape
    heads = params.num_heads
    if hidden % heads != 0:
        raise DimensionError("hidden size not divisible by heads", h.shape, (heads,))
    d_k = hidden // heads

    def split(x: Tensor) -> Tensor:
        return ops.transpose(ops.reshape(x, (batch, seq, heads, d_k)), (0, 2, 1, 3))

    q = split(ops.linear(h, params.W_q))
    k = split(ops.linear(h, params.W_k))
    v = split(ops.linear(h, params.W_v))
    scores = ops.mul(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(d_k))
    probs = ops.softmax(scores, axis=-1, mask=mask[:, None, None, :])
    return probs, v


def multi_head_attention(h: Tensor, params: AttentionParams, mask: Mask = None) -> Tensor:
    """
    Scaled dot-product attention over A heads of width d_k = H / A.

    Heads are concatenated and passed through W_o.

    Args:
        h: Sequence [S, H] or batch [B, S, H]
        params: Attention parameters
        mask: Key mask, True = attendable

    Returns:
        Tensor with the shape of ``h``
    """
    squeeze = h.ndim == 2
    probs, v = attention_probabilities(h, params, mask)
    batch, heads, seq, d_k = v.shape
    context = ops.matmul(probs, v)
    merged = ops.reshape(ops.transpose(context, (0, 2, 1, 3)), (batch, seq, heads * d_k))
    out = params.W_o(merged)
    return ops.reshape(out, out.shape[1:]) if squeeze else out


def transformer_layer(
    h: Tensor,
    params: TransformerLayerParams,
    mode: str,
    rng: Optional[PrngState],
    mask: Mask = None,
    dropout: float = 0.1,
    eps: float = 1e-12
) -> Tensor:
    """
    One post-norm transformer layer with residual connections.

    Args:
        h: Sequence [S, H] or batch [B, S, H]
        params: Layer parameters
        mode: 'train' applies dropout, 'infer' does not
        rng: Stream for dropout masks (train mode only)
        mask: Key mask
        dropout: Dropout rate
        eps: Layer-norm epsilon

    Returns:
        Tensor with the shape of ``h``
    """
    attended = ops.dropout(multi_head_attention(h, params.attn, mask), dropout, mode, rng)
    u = params.norm1(ops.add(h, attended), eps)
    inner = ops.gelu(params.ffn_in(u))
    projected = ops.dropout(params.ffn_out(inner), dropout, mode, rng)
    return params.norm2(ops.add(u, projected), eps)


def run_layers(
    h: Tensor,
    layers: Sequence[TransformerLayerParams],
    mode: str,
    rng: Optional[PrngState],
    mask: Mask = None,
    dropout: float = 0.1,
    eps: float = 1e-12
) -> Tensor:
    """Apply ``layers`` in order."""
    for layer in layers:
        h = transformer_layer(h, layer, mode, rng, mask, dropout, eps)
    return h


def encode(
    h_txtemb: Tensor,
    h_imgemb: Tensor,
    layers: Sequence[TransformerLayerParams],
    mode: str,
    rng: Optional[PrngState],
    mask: Mask = None,
    dropout: float = 0.1,
    eps: float = 1e-12
) -> Tensor:
    """
    Early fusion: one stack over [text slots, target slot, context slots].

    Args:
        h_txtemb: Text embeddings [T, H] or [B, T, H]
        h_imgemb: Image sequence [N+1, H] or [B, N+1, H], target first
        layers: Transformer layers
        mode: 'train' or 'infer'
        rng: Dropout stream
        mask: Key mask over the fused sequence
        dropout: Dropout rate
        eps: Layer-norm epsilon

    Returns:
        Final-layer states [T+N+1, H] (or batched); the target slot is at T
    """
    fused = ops.concat([h_txtemb, h_imgemb], axis=-2)
    return run_layers(fused, layers, mode, rng, mask, dropout, eps)


def late_fusion_encode(
    h_txtemb: Tensor,
    h_ctxemb: Tensor,
    h_targ: Tensor,
    layers_a: Sequence[TransformerLayerParams],
    layers_b: Sequence[TransformerLayerParams],
    mode: str,
    rng: Optional[PrngState],
    mask: Mask = None,
    dropout: float = 0.1,
    eps: float = 1e-12,
    return_states: bool = False
) -> Union[Tuple[Tensor, Tensor], Tuple[Tensor, Tensor, Tensor]]:
    """
    Late fusion: the target is processed apart from text and contexts.

    Stack A runs over [text, contexts] (no target slot) and is mean-pooled
    over attendable slots. Stack B runs over the lone target embedding.

    Args:
        h_txtemb: Text embeddings [T, H] or [B, T, H]
        h_ctxemb: Context embeddings [N, H] or [B, N, H]
        h_targ: Target embedding [H], [1, H] or [B, 1, H]
        layers_a: Layers of the text/context stack
        layers_b: Layers of the target stack
        mode: 'train' or 'infer'
        rng: Dropout stream
        mask: Key mask over [text, contexts]
        dropout: Dropout rate
        eps: Layer-norm epsilon
        return_states: Also return stack A's final states

    Returns:
        (pooled_a, pooled_b), each [H] or [B, H]; plus stack A states when
        ``return_states`` is set
    """
    joint = ops.concat([h_txtemb, h_ctxemb], axis=-2)
    squeeze = joint.ndim == 2
    joint, mask_a, _ = _batched(joint, mask)
    states_a = run_layers(joint, layers_a, mode, rng, mask_a, dropout, eps)
    pooled_a = ops.masked_mean(states_a, mask_a)

    batch = joint.shape[0]
    target = ops.reshape(h_targ, (batch, 1, h_targ.shape[-1]))
    states_b = run_layers(target, layers_b, mode, rng, None, dropout, eps)
    pooled_b = ops.select(states_b, 1, 0)

    if squeeze:
        hidden = pooled_a.shape[-1]
        pooled_a = ops.reshape(pooled_a, (hidden,))
        pooled_b = ops.reshape(pooled_b, (hidden,))
        states_a = ops.reshape(states_a, states_a.shape[1:])
    if return_states:
        return pooled_a, pooled_b, states_a
    return pooled_a, pooled_b
