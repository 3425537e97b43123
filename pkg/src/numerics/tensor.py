"""
Dense tensors with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a :class:`numpy.ndarray`. Primitive operations
(see :mod:`src.numerics.ops`) record themselves on the thread-local active
:class:`Tape` when at least one input requires a gradient; with no active
tape nothing is recorded, which is how inference runs.

Example:
    >>> w = Tensor([3.0], requires_grad=True)
    >>> with Tape() as tape:
    ...     y = w * 2.0
    >>> tape.backward(y)
    >>> w.grad
    array([2.], dtype=float32)
"""

import contextlib
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors.exceptions import GradientError, NumericalError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()
_settings = {'checked': False, 'dtype': np.dtype(np.float32)}


def _tape_stack() -> List['Tape']:
    if not hasattr(_state, 'tapes'):
        _state.tapes = []
    return _state.tapes


def active_tape() -> Optional['Tape']:
    """Return the innermost tape entered on this thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


def get_default_dtype() -> np.dtype:
    """Floating dtype used for tensors built from Python data."""
    return _settings['dtype']


def set_default_dtype(dtype: Union[str, np.dtype]) -> None:
    """Set the floating dtype ('float32' for training, 'float64' to verify)."""
    resolved = np.dtype(dtype)
    if resolved not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"Unsupported dtype: {dtype}")
    _settings['dtype'] = resolved


@contextlib.contextmanager
def default_dtype(dtype: Union[str, np.dtype]) -> Iterator[None]:
    """Temporarily switch the default floating dtype."""
    previous = _settings['dtype']
    set_default_dtype(dtype)
    try:
        yield
    finally:
        _settings['dtype'] = previous


def is_checked() -> bool:
    """Whether every primitive validates its output for NaN/inf."""
    return _settings['checked']


def set_checked(enabled: bool) -> None:
    """Enable or disable checked mode globally."""
    _settings['checked'] = bool(enabled)


@contextlib.contextmanager
def checked_mode(enabled: bool = True) -> Iterator[None]:
    """Temporarily enable checked mode."""
    previous = _settings['checked']
    _settings['checked'] = bool(enabled)
    try:
        yield
    finally:
        _settings['checked'] = previous


class Tensor:
    """
    N-dimensional real array with an optional gradient buffer.

    Attributes:
        data: Row-major values (float32 by default, float64 when verifying)
        grad: Accumulated gradient with the same shape as ``data``, or None
        requires_grad: Whether backward should populate ``grad``
        node_id: Id assigned by the tape that last recorded this tensor
        name: Optional label used in diagnostics
    """

    __slots__ = ('data', 'grad', 'requires_grad', 'node_id', 'name')

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Optional[Union[str, np.dtype]] = None,
        name: Optional[str] = None
    ):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is not None:
            array = np.asarray(data, dtype=dtype)
        else:
            array = np.asarray(data)
            # floating ndarrays keep their dtype; Python data takes the default
            if not (isinstance(data, np.ndarray) and np.issubdtype(array.dtype, np.floating)):
                array = array.astype(get_default_dtype())
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.node_id: Optional[int] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            raise ValueError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def zero_grad(self) -> None:
        """Drop any accumulated gradient."""
        self.grad = None

    def detach(self) -> 'Tensor':
        """Return a tensor sharing data but outside the graph."""
        return Tensor(self.data, dtype=self.data.dtype)

    def __add__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.add(self, other)

    def __radd__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.add(other, self)

    def __sub__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> 'Tensor':
        from src.numerics import ops
        return ops.mul(other, self)

    def __truediv__(self, other: float) -> 'Tensor':
        from src.numerics import ops
        return ops.mul(self, 1.0 / other)

    def __neg__(self) -> 'Tensor':
        from src.numerics import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other: 'Tensor') -> 'Tensor':
        from src.numerics import ops
        return ops.matmul(self, other)

    def __repr__(self) -> str:
        label = f", name={self.name}" if self.name else ""
        return (
            f"Tensor(shape={self.shape}, dtype={self.dtype}, "
            f"requires_grad={self.requires_grad}{label})"
        )


def as_tensor(value: Any, like: Optional[Tensor] = None) -> Tensor:
    """Wrap a constant, matching the dtype of ``like`` when given."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(value, dtype=dtype)


@dataclass
class TapeRecord:
    """One recorded primitive application."""

    op: str
    input_ids: Tuple[int, ...]
    output_id: int
    inputs: Tuple[Tensor, ...]
    backward: BackwardFn


class Tape:
    """
    Ordered record of primitive applications for reverse-mode autodiff.

    Records are appended in execution order, so the list is topologically
    sorted: every input id precedes the record that consumes it.
    """

    def __init__(self) -> None:
        self.records: List[TapeRecord] = []
        self._ids: Dict[int, int] = {}
        self._tensors: Dict[int, Tensor] = {}
        self._next_id = 0

    def __enter__(self) -> 'Tape':
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.records)

    def _node(self, tensor: Tensor) -> int:
        key = id(tensor)
        node = self._ids.get(key)
        if node is None or self._tensors.get(node) is not tensor:
            node = self._next_id
            self._next_id += 1
            self._ids[key] = node
            self._tensors[node] = tensor
        tensor.node_id = node
        return node

    def record(
        self,
        op: str,
        inputs: Sequence[Tensor],
        output: Tensor,
        backward: BackwardFn
    ) -> None:
        """
        Append a primitive application.

        Args:
            op: Primitive name
            inputs: Tensor operands (constants included)
            output: Result tensor
            backward: Maps the output gradient to one gradient per input
        """
        input_ids = tuple(self._node(t) for t in inputs)
        output_id = self._node(output)
        self.records.append(
            TapeRecord(op, input_ids, output_id, tuple(inputs), backward)
        )

    def backward(self, loss: Tensor) -> None:
        """
        Populate ``grad`` on every leaf that requires it.

        The seed gradient of ``loss`` is 1. Each record is visited once,
        newest first. Gradients accumulate into existing ``grad`` buffers.

        Raises:
            GradientError: If loss is not scalar or was not recorded here
        """
        if loss.size != 1:
            raise GradientError(
                "backward requires a scalar loss",
                {'shape': loss.shape}
            )
        node = self._ids.get(id(loss))
        if node is None or self._tensors.get(node) is not loss:
            if loss.requires_grad:
                loss.grad = np.ones_like(loss.data) if loss.grad is None \
                    else loss.grad + 1.0
                return
            raise GradientError("loss was not recorded on this tape")

        grads: Dict[int, np.ndarray] = {node: np.ones_like(loss.data)}
        produced = set()
        for record in reversed(self.records):
            produced.add(record.output_id)
            upstream = grads.pop(record.output_id, None)
            if upstream is None:
                continue
            input_grads = record.backward(upstream)
            for tensor, tid, g in zip(record.inputs, record.input_ids, input_grads):
                if g is None or not tensor.requires_grad:
                    continue
                if tid in grads:
                    grads[tid] = grads[tid] + g
                else:
                    grads[tid] = g

        for tid, g in grads.items():
            tensor = self._tensors[tid]
            if tid in produced or not tensor.requires_grad:
                continue
            g = np.asarray(g, dtype=tensor.dtype).reshape(tensor.shape)
            tensor.grad = g if tensor.grad is None else tensor.grad + g


def backward(loss: Tensor, tape: Optional[Tape] = None) -> None:
    """Run backward on ``tape`` or on the innermost active tape."""
    target = tape or active_tape()
    if target is None:
        raise GradientError("no tape is active; record the forward pass under Tape()")
    target.backward(loss)


def finalize(output: np.ndarray, op: str) -> np.ndarray:
    """Apply checked-mode validation to a primitive's raw output."""
    if _settings['checked'] and not np.all(np.isfinite(output)):
        raise NumericalError(
            f"Non-finite value produced by {op}",
            {'op': op, 'shape': tuple(np.shape(output))}
        )
    return output


def make_result(
    op: str,
    value: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn
) -> Tensor:
    """
    Wrap a primitive's output and record it when gradients are needed.

    Args:
        op: Primitive name
        value: Computed output array
        inputs: Operand tensors
        backward_fn: Gradient rule for the primitive

    Returns:
        Output tensor
    """
    out = Tensor(finalize(value, op), dtype=value.dtype)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(op, inputs, out, backward_fn)
    return out
