"""Windowed multi-head attention with progressive top-k pruning."""

from warpboost.gfm.attention import (
    SparseAttentionMap,
    SparseIndexSet,
    aggregate,
    focused_attention,
    full_support,
    lepe,
    reweight,
    sparse_similarity,
)
from warpboost.gfm.module import (
    GfmLayerTrace,
    GfmTrace,
    dense_focused_reference,
    layer_shift,
    run_gfm,
)
from warpboost.gfm.weights import (
    GfmLayerWeights,
    GfmWeights,
    generate_weights,
    identity_weights,
    load_weights,
    save_weights,
    validate_schedule,
)
from warpboost.gfm.windows import region_mask, window_partition, window_reverse

__all__ = [
    "GfmLayerTrace",
    "GfmLayerWeights",
    "GfmTrace",
    "GfmWeights",
    "SparseAttentionMap",
    "SparseIndexSet",
    "aggregate",
    "dense_focused_reference",
    "focused_attention",
    "full_support",
    "generate_weights",
    "identity_weights",
    "layer_shift",
    "lepe",
    "load_weights",
    "region_mask",
    "reweight",
    "run_gfm",
    "save_weights",
    "sparse_similarity",
    "validate_schedule",
    "window_partition",
    "window_reverse",
]
