"""Wall-clock accounting for pipeline stages."""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class StageTimer:
    """Accumulates elapsed seconds per named stage.

    Stages may be entered many times (once per layer, view or trial); the
    totals are summed.
    """

    totals: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time the enclosed block under ``name``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.totals[name] = self.totals.get(name, 0.0) + elapsed
            self.counts[name] = self.counts.get(name, 0) + 1

    def merge(self, other: "StageTimer") -> None:
        """Add another timer's totals into this one."""
        for name, seconds in other.totals.items():
            self.totals[name] = self.totals.get(name, 0.0) + seconds
            self.counts[name] = self.counts.get(name, 0) + other.counts.get(name, 0)

    def as_dict(self) -> dict[str, float]:
        """Totals rounded to microseconds, in first-seen order."""
        return {name: round(seconds, 6) for name, seconds in self.totals.items()}
