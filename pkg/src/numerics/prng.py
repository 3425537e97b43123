"""
Seeded, splittable random streams.

Every random draw in the package (initialisation, dropout masks, shuffling,
MLM masking, synthetic data) goes through a :class:`PrngState`. Streams use
numpy's counter-based Philox bit generator keyed by a 64-bit seed, and child
streams are derived with :meth:`PrngState.fork` through ``SeedSequence``
hashing, so a stream for "epoch 3" or "step 1200" can be rebuilt from the
root seed without replaying earlier draws.
"""

import zlib
from typing import List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

T = TypeVar('T')
Key = Union[int, str]

_MASK64 = (1 << 64) - 1


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode('utf-8'))
    return int(key) & _MASK64


class PrngState:
    """
    A deterministic random stream.

    Attributes:
        seed: 64-bit key of the Philox generator
        counter: Number of draw calls made on this stream
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0
        self._generator = np.random.Generator(np.random.Philox(key=self.seed))

    def fork(self, *keys: Key) -> 'PrngState':
        """
        Derive an independent child stream.

        The child depends only on this stream's seed and the keys, never on
        how many draws were made here.

        Args:
            *keys: Integers or strings naming the child (e.g. 'epoch', 3)

        Returns:
            New PrngState
        """
        entropy = [self.seed & 0xFFFFFFFF, self.seed >> 32]
        entropy.extend(_key_to_int(k) for k in keys)
        child = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0]
        return PrngState(int(child))

    def _draw(self) -> np.random.Generator:
        self.counter += 1
        return self._generator

    def uniform(
        self,
        shape: Union[int, Tuple[int, ...]] = (),
        dtype: Union[str, np.dtype] = np.float64
    ) -> np.ndarray:
        """Uniform values in [0, 1)."""
        return np.asarray(self._draw().random(shape), dtype=dtype)

    def normal(
        self,
        shape: Union[int, Tuple[int, ...]] = (),
        std: float = 1.0,
        dtype: Union[str, np.dtype] = np.float64
    ) -> np.ndarray:
        """Zero-mean Gaussian values."""
        return np.asarray(self._draw().standard_normal(shape) * std, dtype=dtype)

    def truncated_normal(
        self,
        shape: Tuple[int, ...],
        std: float,
        bound: float = 2.0,
        dtype: Union[str, np.dtype] = np.float64
    ) -> np.ndarray:
        """
        Gaussian values redrawn until within ``bound`` standard deviations.

        Args:
            shape: Output shape
            std: Standard deviation
            bound: Truncation point in units of std
            dtype: Output dtype

        Returns:
            Array of the requested shape
        """
        values = np.asarray(self._draw().standard_normal(shape), dtype=np.float64)
        outside = np.abs(values) > bound
        while np.any(outside):
            values[outside] = self._draw().standard_normal(int(outside.sum()))
            outside = np.abs(values) > bound
        return np.asarray(values * std, dtype=dtype)

    def integers(
        self,
        low: int,
        high: int,
        shape: Union[int, Tuple[int, ...], None] = None
    ) -> Union[int, np.ndarray]:
        """Integers in [low, high)."""
        value = self._draw().integers(low, high, size=shape)
        return int(value) if shape is None else value

    def permutation(self, n: int) -> np.ndarray:
        """A random permutation of range(n)."""
        return self._draw().permutation(n)

    def shuffle(self, items: Sequence[T]) -> List[T]:
        """Return a shuffled copy of ``items``."""
        order = self.permutation(len(items))
        return [items[i] for i in order]

    def choice(self, n: int, k: int, replace: bool = False) -> np.ndarray:
        """``k`` indices drawn from range(n)."""
        return self._draw().choice(n, size=k, replace=replace)

    def __repr__(self) -> str:
        return f"PrngState(seed={self.seed}, counter={self.counter})"


def as_prng(rng: Optional[Union[PrngState, int]]) -> PrngState:
    """Accept a PrngState, an integer seed, or None (seed 0)."""
    if isinstance(rng, PrngState):
        return rng
    return PrngState(0 if rng is None else rng)
