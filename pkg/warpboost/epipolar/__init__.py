"""Warp-index correlation, refinement and depth attention."""

from warpboost.epipolar.attention import (
    DEFAULT_INVALID_FILL,
    AttentionVolume,
    attention_from_correlation,
    softmax,
)
from warpboost.epipolar.correlation import (
    CorrelationVolume,
    dense_correlation,
    multiview_correlation,
    refine_correlation,
    smm_correlation,
    upsample_correlation,
)
from warpboost.epipolar.memory import ByteCounter

__all__ = [
    "AttentionVolume",
    "ByteCounter",
    "CorrelationVolume",
    "DEFAULT_INVALID_FILL",
    "attention_from_correlation",
    "dense_correlation",
    "multiview_correlation",
    "refine_correlation",
    "smm_correlation",
    "softmax",
    "upsample_correlation",
]
