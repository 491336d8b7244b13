"""Softmax attention over depth candidates."""

from dataclasses import dataclass

import numpy as np

from warpboost.epipolar.correlation import CorrelationVolume
from warpboost.tensorio.tensor import DoubleArray

DEFAULT_INVALID_FILL = -1e4


@dataclass(frozen=True, eq=False)
class AttentionVolume:
    """``[H, W, D]`` probabilities over candidates; each row sums to 1."""

    probs: DoubleArray

    @property
    def shape(self) -> tuple[int, int, int]:
        h, w, d = self.probs.shape
        return h, w, d


def softmax(logits: np.ndarray, axis: int = -1) -> DoubleArray:
    """Numerically stable softmax (per-row maximum subtracted)."""
    shifted = np.asarray(logits, dtype=np.float64)
    shifted = shifted - shifted.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def attention_from_correlation(
    volume: CorrelationVolume,
    invalid_fill: float = DEFAULT_INVALID_FILL,
) -> AttentionVolume:
    """Softmax along the depth axis, with invalid entries set to ``invalid_fill``.

    Pixels with no valid candidate get a uniform row.
    """
    logits = np.where(volume.valid, volume.values.astype(np.float64), invalid_fill)
    probs = softmax(logits, axis=-1)

    empty = ~volume.valid.any(axis=-1)
    if empty.any():
        probs[empty] = 1.0 / probs.shape[-1]
    return AttentionVolume(probs=probs)
