"""Seeded, platform-independent random streams.

Streams use numpy's counter-based Philox generator: the seed is mixed into a
64-bit key and every draw advances a counter, so identical seeds reproduce
identical sequences on every platform.
"""

from dataclasses import dataclass, field

import numpy as np

from warpboost.core.errors import InvalidDrawCountError
from warpboost.tensorio.tensor import DoubleArray, FloatArray


@dataclass
class Rng:
    """A seeded random stream.

    Draws advance the stream; create a new ``Rng`` with the same seed to
    replay a sequence.
    """

    seed: int
    _generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._generator = np.random.Generator(np.random.Philox(self.seed))

    @property
    def generator(self) -> np.random.Generator:
        """The underlying numpy generator."""
        return self._generator

    def uniform(self, n: int) -> FloatArray:
        """Draw ``n`` float32 values in ``[0, 1)``."""
        return self._generator.random(n, dtype=np.float32)

    def normal(self, shape: tuple[int, ...], scale: float = 1.0) -> DoubleArray:
        """Draw standard normal values scaled by ``scale``."""
        return self._generator.standard_normal(shape) * scale

    def spawn(self, key: int) -> "Rng":
        """Derive an independent stream for a sub-component."""
        return Rng(seed=(self.seed * 1_000_003 + key) % (1 << 63))


def rng_uniform(rng: Rng, n: int) -> FloatArray:
    """Draw ``n`` uniform values in ``[0, 1)`` from ``rng``.

    Raises:
        InvalidDrawCountError: If ``n`` is smaller than 1.
    """
    if n < 1:
        raise InvalidDrawCountError(f"n must be at least 1, got {n}")
    return rng.uniform(n)
