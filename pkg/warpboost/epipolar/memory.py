"""Byte accounting for transient buffers of the correlation stage."""

from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np


@dataclass
class ByteCounter:
    """Tracks live and peak bytes of buffers registered with it.

    Only buffers explicitly registered are counted, so the peak reflects
    the algorithm's working set rather than interpreter overhead.
    """

    current: int = 0
    peak: int = 0
    allocations: int = 0

    def allocate(self, nbytes: int) -> None:
        self.current += int(nbytes)
        self.allocations += 1
        self.peak = max(self.peak, self.current)

    def release(self, nbytes: int) -> None:
        self.current -= int(nbytes)

    @contextmanager
    def track(self, *arrays: np.ndarray | int) -> Iterator[None]:
        """Count arrays (or raw byte sizes) as live for the enclosed block."""
        nbytes = sum(a if isinstance(a, int) else a.nbytes for a in arrays)
        self.allocate(nbytes)
        try:
            yield
        finally:
            self.release(nbytes)

    def reset(self) -> None:
        self.current = 0
        self.peak = 0
        self.allocations = 0
