"""Sparse focused attention inside one window.

Every query keeps an ascending list of key slots (its support) and a
weight per slot. A layer scores only the supported keys, multiplies the
softmax of those scores into the previous weights, and keeps the
strongest ``retain`` slots.
"""

from dataclasses import dataclass

import numpy as np

from warpboost.core.errors import (
    AlignmentError,
    IndexOutOfWindowError,
    InvalidScheduleError,
    ZeroRetainError,
)
from warpboost.tensorio.tensor import AnyArray, BoolArray, DoubleArray


@dataclass(frozen=True, eq=False)
class SparseIndexSet:
    """Retained key slots, ``[..., T, k]``, ascending along the last axis."""

    indices: AnyArray

    @property
    def count(self) -> int:
        """Slots retained per query."""
        return int(self.indices.shape[-1])


@dataclass(frozen=True, eq=False)
class SparseAttentionMap:
    """Weights aligned with a :class:`SparseIndexSet`; rows sum to 1."""

    weights: DoubleArray

    @property
    def max_row_error(self) -> float:
        """Largest deviation of a row sum from 1."""
        return float(np.abs(self.weights.sum(axis=-1) - 1.0).max())


def full_support(tokens: int, leading: tuple[int, ...] = ()) -> tuple[SparseIndexSet, SparseAttentionMap]:
    """Every query attends to every slot with equal weight."""
    indices = np.broadcast_to(np.arange(tokens, dtype=np.int64), (*leading, tokens, tokens)).copy()
    weights = np.full((*leading, tokens, tokens), 1.0 / tokens, dtype=np.float64)
    return SparseIndexSet(indices), SparseAttentionMap(weights)


def sparse_similarity(
    queries: np.ndarray,
    keys: np.ndarray,
    support: SparseIndexSet,
    scale: float,
    allowed: BoolArray | None = None,
) -> DoubleArray:
    """Scaled dot products between each query and its supported keys only.

    Args:
        queries: ``[T, d]`` query vectors.
        keys: ``[T, d]`` key vectors.
        support: ``[T, k]`` key slots per query.
        scale: Multiplier applied to the dot products.
        allowed: Optional ``[T, T]`` mask; disallowed pairs score ``-inf``.

    Returns:
        ``[T, k]`` scores.

    Raises:
        IndexOutOfWindowError: If a slot is outside ``[0, T)``.
    """
    tokens = keys.shape[0]
    indices = support.indices
    if indices.shape[0] != queries.shape[0]:
        raise AlignmentError(f"support has {indices.shape[0]} rows for {queries.shape[0]} queries")
    if indices.size and (indices.min() < 0 or indices.max() >= tokens):
        raise IndexOutOfWindowError(f"support slots must lie in [0, {tokens})")

    gathered = np.asarray(keys, dtype=np.float64)[indices]
    scores = np.einsum("td,tkd->tk", np.asarray(queries, dtype=np.float64), gathered) * scale
    if allowed is not None:
        rows = np.arange(indices.shape[0])[:, None]
        scores = np.where(allowed[rows, indices], scores, -np.inf)
    return scores


def _support_softmax(scores: DoubleArray) -> tuple[DoubleArray, BoolArray]:
    """Softmax per row over finite scores; also flags rows with none."""
    finite = np.isfinite(scores)
    live = finite.any(axis=-1)
    peak = np.where(finite, scores, -np.inf).max(axis=-1, keepdims=True)
    peak = np.where(live[:, None], peak, 0.0)
    exp = np.where(finite, np.exp(np.where(finite, scores, 0.0) - peak), 0.0)
    total = exp.sum(axis=-1, keepdims=True)
    return exp / np.where(total > 0, total, 1.0), live


def _uniform_fallback(scores: DoubleArray, live: BoolArray) -> DoubleArray:
    """Equal weight over the unmasked slots of each row; all slots if none are."""
    allowed = np.isfinite(scores) | ~live[:, None]
    return allowed / allowed.sum(axis=-1, keepdims=True)


def focused_attention(
    previous: SparseAttentionMap,
    support: SparseIndexSet,
    scores: DoubleArray,
    retain: int,
) -> tuple[SparseAttentionMap, SparseIndexSet]:
    """Fuse new scores into the previous weights and keep the top ``retain`` slots.

    ``tmp = Norm(previous * softmax(scores))``; the ``retain`` largest
    entries of ``tmp`` per query are kept (ties go to the smaller slot),
    returned in ascending slot order and renormalised. A query whose scores
    are all masked keeps its previous weights. A row whose fused weights
    vanish falls back to equal weight over its unmasked slots.

    Raises:
        ZeroRetainError: If ``retain`` is 0.
        InvalidScheduleError: If ``retain`` exceeds the support size.
    """
    if retain < 1:
        raise ZeroRetainError("a layer must retain at least one key")
    if retain > support.count:
        raise InvalidScheduleError(f"cannot retain {retain} of {support.count} supported keys")
    if previous.weights.shape != support.indices.shape or scores.shape != support.indices.shape:
        raise AlignmentError("weights, scores and support must share a shape")

    probs, live = _support_softmax(scores)
    fused = np.where(live[:, None], previous.weights * probs, previous.weights)
    total = fused.sum(axis=-1, keepdims=True)
    fused = np.where(total > 0, fused / np.where(total > 0, total, 1.0), _uniform_fallback(scores, live))

    order = np.argsort(-fused, axis=-1, kind="stable")[:, :retain]
    order = np.sort(order, axis=-1)
    kept = np.take_along_axis(fused, order, axis=-1)
    kept_total = kept.sum(axis=-1, keepdims=True)
    kept = np.where(kept_total > 0, kept / np.where(kept_total > 0, kept_total, 1.0), 1.0 / retain)

    indices = np.take_along_axis(support.indices, order, axis=-1)
    return SparseAttentionMap(kept), SparseIndexSet(indices)


def aggregate(weights: SparseAttentionMap, values: np.ndarray, support: SparseIndexSet) -> DoubleArray:
    """Weighted sum of the supported value rows: ``O_q = sum_j A(q, j) V_j``."""
    if weights.weights.shape != support.indices.shape:
        raise AlignmentError("weights and support must share a shape")
    gathered = np.asarray(values, dtype=np.float64)[support.indices]
    return np.einsum("tk,tkd->td", weights.weights, gathered)


def lepe(values: np.ndarray, kernels: np.ndarray, window: int) -> DoubleArray:
    """Per-channel 3×3 cross-correlation of window values, zero-padded.

    Args:
        values: ``[window², C]`` value rows of one window.
        kernels: ``[C, 3, 3]`` kernels.
        window: Window side.
    """
    channels = values.shape[-1]
    grid = np.asarray(values, dtype=np.float64).reshape(window, window, channels)
    padded = np.pad(grid, ((1, 1), (1, 1), (0, 0)))
    out = np.zeros_like(grid)
    for dy in range(3):
        for dx in range(3):
            out += padded[dy : dy + window, dx : dx + window, :] * kernels[:, dy, dx]
    return out.reshape(window * window, channels)


def reweight(
    weights: list[SparseAttentionMap],
    supports: list[SparseIndexSet],
    values: np.ndarray,
    groups: list[slice],
    lepe_kernels: np.ndarray,
    projection: np.ndarray,
    window: int,
) -> DoubleArray:
    """Combine value rows per head, add the positional term and project.

    Args:
        weights: Per-head ``[T, k]`` attention weights.
        supports: Per-head ``[T, k]`` key slots.
        values: ``[T, C]`` value rows of one window.
        groups: Channel slice of each head.
        lepe_kernels: ``[C, 3, 3]`` positional kernels.
        projection: ``[C, C]`` output projection (row vectors times matrix).
        window: Window side.

    Returns:
        ``[T, C]`` outputs before any residual connection.
    """
    if not (len(weights) == len(supports) == len(groups)):
        raise AlignmentError("one weight map and support per head are required")

    heads = np.zeros(np.shape(values), dtype=np.float64)
    for head_weights, head_support, group in zip(weights, supports, groups):
        heads[:, group] = aggregate(head_weights, values[:, group], head_support)
    heads += lepe(values, lepe_kernels, window)
    return heads @ projection
