"""The Gaussian focused module: stacked windowed attention with progressive pruning.

Layer ``l`` partitions the map into windows (shifted by half a window on
odd layers), scores each query against its retained key slots, fuses the
softmax into the previous weights, keeps ``retain_schedule[l]`` slots per
query and head, and adds the reweighted values back onto its input.

Index sets are carried in window-slot coordinates from layer to layer, one
set per (window, head, query).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from warpboost.core.errors import AlignmentError
from warpboost.epipolar.attention import softmax
from warpboost.gfm.attention import (
    SparseAttentionMap,
    SparseIndexSet,
    focused_attention,
    full_support,
    lepe,
    reweight,
    sparse_similarity,
)
from warpboost.gfm.weights import GfmWeights
from warpboost.gfm.windows import region_mask, window_partition, window_reverse
from warpboost.tensorio.tensor import AnyArray, DoubleArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GfmLayerTrace:
    """Retained slots and weights of one layer, ``[windows, heads, T, k]``."""

    shift: int
    retain: int
    indices: AnyArray
    weights: DoubleArray


@dataclass
class GfmTrace:
    """Per-layer record of a module run."""

    tokens: int = 0
    layers: list[GfmLayerTrace] = field(default_factory=list)

    def counts(self) -> list[int]:
        """Slots retained per query at each layer."""
        return [int(layer.indices.shape[-1]) for layer in self.layers]

    def max_row_error(self) -> float:
        """Largest deviation of any weight row sum from 1."""
        if not self.layers:
            return 0.0
        return max(float(np.abs(layer.weights.sum(axis=-1) - 1.0).max()) for layer in self.layers)

    def nesting_violations(self) -> int:
        """Rows whose slots are not a subset of the previous layer's slots."""
        violations = 0
        previous: AnyArray | None = None
        for layer in self.layers:
            current = layer.indices
            if previous is None:
                previous = np.broadcast_to(np.arange(self.tokens), (*current.shape[:-1], self.tokens))
            violations += _count_non_nested(previous, current, self.tokens)
            previous = current
        return violations


def _count_non_nested(outer: AnyArray, inner: AnyArray, tokens: int) -> int:
    rows_outer = outer.reshape(-1, outer.shape[-1]).astype(np.int64)
    rows_inner = inner.reshape(-1, inner.shape[-1]).astype(np.int64)
    offsets = np.arange(rows_outer.shape[0], dtype=np.int64)[:, None] * tokens
    contained = np.isin(rows_inner + offsets, rows_outer + offsets)
    return int((~contained.all(axis=-1)).sum())


def layer_shift(layer: int, window: int, shift_windows: bool) -> int:
    """Window shift used at ``layer``."""
    return window // 2 if shift_windows and layer % 2 == 1 else 0


def _check_features(features: np.ndarray, weights: GfmWeights) -> None:
    if features.ndim != 3 or features.shape[-1] != weights.channels:
        raise AlignmentError(
            f"features {features.shape} do not match {weights.channels} weight channels"
        )


def run_gfm(
    features: np.ndarray,
    weights: GfmWeights,
    residual: bool = True,
    shift_windows: bool = True,
    trace: GfmTrace | None = None,
) -> DoubleArray:
    """Apply every layer of the module to ``[H, W, C]`` Gaussian features.

    Args:
        features: Token features on an ``H``×``W`` grid.
        weights: Module weights and layout.
        residual: Add each layer's output to its input.
        shift_windows: Shift windows by half a window on odd layers.
        trace: Filled with each layer's retained slots and weights.

    Returns:
        ``[H, W, C]`` output features.

    Raises:
        IndivisibleWindowError: If the window does not tile the grid.
    """
    _check_features(features, weights)
    height, width, _ = features.shape
    window = weights.window
    tokens = window * window
    groups = weights.head_groups
    x = np.asarray(features, dtype=np.float64)

    window_count = (height // window) * (width // window)
    support, attention = full_support(tokens, (window_count, weights.heads))
    indices, attn = support.indices, attention.weights
    if trace is not None:
        trace.tokens = tokens

    for index, (layer, retain) in enumerate(zip(weights.layers, weights.retain_schedule)):
        shift = layer_shift(index, window, shift_windows)
        windows = window_partition(x, window, shift)
        allowed = region_mask(height, width, window, shift) if shift else None
        q, k, v = windows @ layer.w_q, windows @ layer.w_k, windows @ layer.w_v

        next_indices = np.zeros((window_count, weights.heads, tokens, retain), dtype=np.int64)
        next_attn = np.zeros((window_count, weights.heads, tokens, retain), dtype=np.float64)
        outputs = np.zeros_like(windows)

        for w in range(window_count):
            maps: list[SparseAttentionMap] = []
            sets: list[SparseIndexSet] = []
            for h, group in enumerate(groups):
                head_support = SparseIndexSet(indices[w, h])
                scale = 1.0 / np.sqrt(group.stop - group.start)
                scores = sparse_similarity(
                    q[w][:, group],
                    k[w][:, group],
                    head_support,
                    scale,
                    None if allowed is None else allowed[w],
                )
                head_map, head_set = focused_attention(
                    SparseAttentionMap(attn[w, h]), head_support, scores, retain
                )
                next_indices[w, h] = head_set.indices
                next_attn[w, h] = head_map.weights
                maps.append(head_map)
                sets.append(head_set)
            outputs[w] = reweight(maps, sets, v[w], groups, layer.lepe, layer.w_out, window)

        update = window_reverse(outputs, window, height, width, shift)
        x = x + update if residual else update
        indices, attn = next_indices, next_attn
        logger.debug(f"GFM layer {index}: shift={shift}, retain={retain}")
        if trace is not None:
            trace.layers.append(GfmLayerTrace(shift, retain, next_indices, next_attn))

    return x


def dense_focused_reference(
    features: np.ndarray,
    weights: GfmWeights,
    residual: bool = True,
    shift_windows: bool = True,
) -> DoubleArray:
    """Dense counterpart of :func:`run_gfm` that never prunes.

    Every layer scores all ``T×T`` pairs and carries the multiplicative
    weights densely. With a schedule retaining every token this equals
    :func:`run_gfm`; with one layer it is plain windowed attention.
    """
    _check_features(features, weights)
    height, width, _ = features.shape
    window = weights.window
    tokens = window * window
    groups = weights.head_groups
    x = np.asarray(features, dtype=np.float64)
    window_count = (height // window) * (width // window)
    attn = np.full((window_count, weights.heads, tokens, tokens), 1.0 / tokens)

    for index, layer in enumerate(weights.layers):
        shift = layer_shift(index, window, shift_windows)
        windows = window_partition(x, window, shift)
        allowed = region_mask(height, width, window, shift)
        q, k, v = windows @ layer.w_q, windows @ layer.w_k, windows @ layer.w_v
        outputs = np.zeros_like(windows)

        for w in range(window_count):
            combined = np.zeros((tokens, windows.shape[-1]))
            for h, group in enumerate(groups):
                scale = 1.0 / np.sqrt(group.stop - group.start)
                scores = (q[w][:, group] @ k[w][:, group].T) * scale
                probs = softmax(np.where(allowed[w], scores, -np.inf), axis=-1)
                fused = attn[w, h] * probs
                fused /= fused.sum(axis=-1, keepdims=True)
                attn[w, h] = fused
                combined[:, group] = fused @ v[w][:, group]
            combined += lepe(v[w], layer.lepe, window)
            outputs[w] = combined @ layer.w_out

        update = window_reverse(outputs, window, height, width, shift)
        x = x + update if residual else update

    return x
