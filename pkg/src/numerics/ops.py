"""
Differentiable primitives.

Each function computes its result with numpy and registers a gradient rule
through :func:`src.numerics.tensor.make_result`. Shapes follow numpy
broadcasting; gradients of broadcast operands are reduced back to the
operand's shape.
"""

import math
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors.exceptions import DimensionError, ValidationError
from src.numerics.prng import PrngState
from src.numerics.tensor import Tensor, as_tensor, make_result

TRAIN = 'train'
INFER = 'infer'

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)
_erf = np.vectorize(math.erf, otypes=[np.float64])

Operand = Union[Tensor, float, int, np.ndarray]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _pair(a: Operand, b: Operand) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


def add(a: Operand, b: Operand) -> Tensor:
    """Elementwise ``a + b``."""
    a, b = _pair(a, b)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)]

    return make_result('add', a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    """Elementwise ``a - b``."""
    a, b = _pair(a, b)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)]

    return make_result('sub', a.data - b.data, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    """Elementwise ``a * b``."""
    a, b = _pair(a, b)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)]

    return make_result('mul', a.data * b.data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Batched matrix product over the last two axes.

    Raises:
        DimensionError: If inner dimensions disagree
    """
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError("matmul inner dimensions disagree", a.shape, b.shape)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return [_unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)]

    return make_result('matmul', np.matmul(a.data, b.data), (a, b), backward)


def linear(x: Tensor, W: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """
    Affine map ``y = xW + b`` over the last axis of ``x``.

    Args:
        x: Input of shape [..., d_in]
        W: Weights of shape [d_in, d_out]
        b: Optional bias of shape [d_out]

    Returns:
        Tensor of shape [..., d_out]

    Raises:
        DimensionError: If shapes are incompatible
    """
    if W.ndim != 2 or x.ndim < 1 or x.shape[-1] != W.shape[0]:
        raise DimensionError("linear input and weight disagree", x.shape, W.shape)
    if b is not None and b.shape != (W.shape[1],):
        raise DimensionError("linear bias and weight disagree", b.shape, W.shape)

    out = np.matmul(x.data, W.data)
    if b is not None:
        out = out + b.data
    inputs: Tuple[Tensor, ...] = (x, W) if b is None else (x, W, b)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        g2 = g.reshape(-1, W.shape[1])
        x2 = x.data.reshape(-1, W.shape[0])
        grads = [np.matmul(g, W.data.T), np.matmul(x2.T, g2)]
        if b is not None:
            grads.append(g2.sum(axis=0))
        return grads

    return make_result('linear', out, inputs, backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    """View ``x`` with a new shape."""
    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [g.reshape(x.shape)]

    return make_result('reshape', x.data.reshape(tuple(shape)), (x,), backward)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    """Permute axes of ``x``."""
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [g.transpose(inverse)]

    return make_result('transpose', x.data.transpose(axes), (x,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """
    Concatenate tensors along ``axis``.

    Raises:
        DimensionError: If non-concatenated dimensions differ
    """
    tensors = list(tensors)
    ndim = tensors[0].ndim
    axis = axis % ndim
    for t in tensors[1:]:
        other = t.shape[:axis] + t.shape[axis + 1:]
        first = tensors[0].shape[:axis] + tensors[0].shape[axis + 1:]
        if t.ndim != ndim or other != first:
            raise DimensionError("concat shapes disagree", tensors[0].shape, t.shape)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return list(np.split(g, splits, axis=axis))

    value = np.concatenate([t.data for t in tensors], axis=axis)
    return make_result('concat', value, tuple(tensors), backward)


def take(table: Tensor, indices: np.ndarray) -> Tensor:
    """
    Gather rows of ``table``; the index lookup equivalent of a one-hot product.

    Args:
        table: Tensor of shape [V, ...]
        indices: Integer array of any shape with values in [0, V)

    Returns:
        Tensor of shape indices.shape + table.shape[1:]

    Raises:
        ValidationError: If an index is out of range
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise ValidationError(
            "index out of range for lookup table",
            {'rows': table.shape[0], 'min': int(indices.min()), 'max': int(indices.max())}
        )

    def backward(g: np.ndarray) -> List[np.ndarray]:
        grad = np.zeros_like(table.data)
        np.add.at(grad, indices, g)
        return [grad]

    return make_result('take', table.data[indices], (table,), backward)


def narrow(x: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Slice ``length`` entries starting at ``start`` along ``axis``."""
    axis = axis % x.ndim
    index: List[Any] = [slice(None)] * x.ndim
    index[axis] = slice(start, start + length)
    key = tuple(index)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        grad = np.zeros_like(x.data)
        grad[key] = g
        return [grad]

    return make_result('narrow', x.data[key], (x,), backward)


def select(x: Tensor, axis: int, index: int) -> Tensor:
    """Pick one entry along ``axis``, dropping that axis."""
    axis = axis % x.ndim
    key: List[Any] = [slice(None)] * x.ndim
    key[axis] = index
    key_t = tuple(key)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        grad = np.zeros_like(x.data)
        grad[key_t] = g
        return [grad]

    return make_result('select', x.data[key_t], (x,), backward)


def sum(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None,
        keepdims: bool = False) -> Tensor:
    """Sum of elements over ``axis`` (all axes when None)."""
    def backward(g: np.ndarray) -> List[np.ndarray]:
        if axis is not None and not keepdims:
            axes = (axis,) if isinstance(axis, int) else axis
            for ax in sorted(a % x.ndim for a in axes):
                g = np.expand_dims(g, ax)
        return [np.broadcast_to(g, x.shape).copy()]

    value = np.asarray(x.data.sum(axis=axis, keepdims=keepdims), dtype=x.dtype)
    return make_result('sum', value, (x,), backward)


def softmax(x: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Numerically stable softmax along ``axis``.

    Args:
        x: Scores
        axis: Axis to normalise
        mask: Optional boolean array broadcastable to ``x``; False entries
            get probability exactly 0

    Raises:
        ValidationError: If the axis is empty or a row has no unmasked entry
    """
    if x.ndim == 0 or x.shape[axis] == 0:
        raise ValidationError("softmax over an empty axis", {'shape': x.shape})
    scores = x.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), scores.shape)
        if not np.all(mask.any(axis=axis)):
            raise ValidationError("softmax row has no attendable entry", {'shape': x.shape})
        scores = np.where(mask, scores, -np.inf)
    shifted = scores - scores.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    y = exp / exp.sum(axis=axis, keepdims=True)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [y * (g - (g * y).sum(axis=axis, keepdims=True))]

    return make_result('softmax', y, (x,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-12) -> Tensor:
    """
    Normalise the last axis to zero mean and unit variance, then scale/shift.

    Raises:
        ValidationError: If the last axis is empty
        DimensionError: If gain/bias do not match the last axis
    """
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValidationError("layer_norm over an empty axis", {'shape': x.shape})
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise DimensionError("layer_norm gain/bias disagree with input", x.shape, gain.shape)

    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    y = xhat * gain.data + bias.data

    def backward(g: np.ndarray) -> List[np.ndarray]:
        lead = tuple(range(g.ndim - 1))
        gxhat = g * gain.data
        gx = inv_std * (
            gxhat
            - gxhat.mean(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return [gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)]

    return make_result('layer_norm', y.astype(x.dtype), (x, gain, bias), backward)


def gelu(x: Tensor) -> Tensor:
    """Exact GELU, ``x * Phi(x)`` with the Gaussian CDF from ``erf``."""
    cdf = (0.5 * (1.0 + _erf(x.data * _INV_SQRT2))).astype(x.dtype)
    pdf = (np.exp(-0.5 * x.data * x.data) * _INV_SQRT2PI).astype(x.dtype)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [g * (cdf + x.data * pdf)]

    return make_result('gelu', x.data * cdf, (x,), backward)


def dropout(x: Tensor, p: float, mode: str, rng: Optional[PrngState]) -> Tensor:
    """
    Inverted dropout.

    In ``infer`` mode (or with p == 0) the input is returned unchanged. In
    ``train`` mode each element is kept with probability 1 - p and scaled by
    1 / (1 - p).

    Raises:
        ValidationError: If p is outside [0, 1) or mode is unknown
    """
    if not 0.0 <= p < 1.0:
        raise ValidationError("dropout probability must be in [0, 1)", {'p': p})
    if mode not in (TRAIN, INFER):
        raise ValidationError(f"unknown mode: {mode}", {'mode': mode})
    if mode == INFER or p == 0.0:
        return x
    if rng is None:
        raise ValidationError("train-mode dropout needs a PrngState")
    keep = (rng.uniform(x.shape) >= p).astype(x.dtype) * x.dtype.type(1.0 / (1.0 - p))

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [g * keep]

    return make_result('dropout', x.data * keep, (x,), backward)


def cross_entropy(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """
    Cross entropy of softmax(logits) against class indices, summed over rows.

    Args:
        logits: Tensor of shape [n, C]
        labels: n class indices in [0, C)

    Returns:
        Scalar tensor

    Raises:
        ValidationError: If a label is out of range or counts disagree
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise ValidationError(
            "logits and labels disagree",
            {'logits': logits.shape, 'labels': labels.shape}
        )
    classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ValidationError("label out of range", {'classes': classes})

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(labels.shape[0])
    loss = np.asarray(-log_probs[rows, labels].sum(), dtype=logits.dtype)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        grad = np.exp(log_probs)
        grad[rows, labels] -= 1.0
        return [grad * g]

    return make_result('cross_entropy', loss, (logits,), backward)


def masked_mean(x: Tensor, mask: np.ndarray) -> Tensor:
    """
    Mean over axis -2 of ``x`` restricted to slots where ``mask`` is True.

    Args:
        x: Tensor of shape [..., S, H]
        mask: Boolean array of shape [..., S]

    Returns:
        Tensor of shape [..., H]
    """
    weights = np.asarray(mask, dtype=x.dtype)[..., None]
    counts = np.maximum(weights.sum(axis=-2), 1.0)
    return mul(sum(mul(x, weights), axis=-2), 1.0 / counts)
