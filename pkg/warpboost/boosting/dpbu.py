"""Depth probability boosting.

A boosting unit runs several epipolar attention layers against the same
candidate set and fuses their attention maps multiplicatively:

    P_0 = uniform
    P_m = Norm(P_{m-1} * A_m)
    dD  = sum_k P_M[k] * G[k]
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from warpboost.config.settings import PipelineConfig
from warpboost.core.errors import ShapeMismatchError
from warpboost.core.timing import StageTimer
from warpboost.epipolar.attention import attention_from_correlation
from warpboost.epipolar.correlation import (
    multiview_correlation,
    refine_correlation,
    upsample_correlation,
)
from warpboost.epipolar.memory import ByteCounter
from warpboost.geometry.camera import CameraView
from warpboost.geometry.candidates import DepthHypothesisGrid
from warpboost.geometry.warp import WarpIndexMap, compute_warp_indices
from warpboost.tensorio.tensor import DoubleArray, FloatArray

logger = logging.getLogger(__name__)

NORMALIZATION_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class BoostState:
    """Depth probabilities after ``layer_index`` attention layers."""

    probs: DoubleArray
    layer_index: int

    @property
    def max_row_error(self) -> float:
        """Largest deviation of a row sum from 1."""
        return float(np.abs(self.probs.sum(axis=-1) - 1.0).max())


def uniform_probabilities(height: int, width: int, depth: int) -> DoubleArray:
    """The all-ones volume after row normalisation."""
    return np.full((height, width, depth), 1.0 / depth, dtype=np.float64)


def boost(prior: np.ndarray, attention: np.ndarray) -> DoubleArray:
    """Row-normalised element-wise product of a prior and an attention map.

    Rows whose product sums below 1e-12 become uniform.

    Raises:
        ShapeMismatchError: If the volumes differ in shape.
    """
    if prior.shape != attention.shape:
        raise ShapeMismatchError(f"prior {prior.shape} and attention {attention.shape} differ")

    product = np.asarray(prior, dtype=np.float64) * np.asarray(attention, dtype=np.float64)
    total = product.sum(axis=-1, keepdims=True)
    ok = total >= NORMALIZATION_FLOOR
    return np.where(ok, product / np.where(ok, total, 1.0), 1.0 / product.shape[-1])


def expected_candidate(probs: np.ndarray, grid: DepthHypothesisGrid) -> DoubleArray:
    """Probability-weighted mean of the candidate values per pixel."""
    return np.sum(np.asarray(probs, dtype=np.float64) * grid.values, axis=-1)


def update_depth(previous: np.ndarray, delta: np.ndarray, near: float, far: float) -> FloatArray:
    """Add a depth update and clamp the result to ``[near, far]``.

    Raises:
        ShapeMismatchError: If the maps differ in shape.
    """
    if np.shape(previous) != np.shape(delta):
        raise ShapeMismatchError(f"depth {np.shape(previous)} and update {np.shape(delta)} differ")
    updated = np.asarray(previous, dtype=np.float64) + np.asarray(delta, dtype=np.float64)
    return np.clip(updated, near, far).astype(np.float32)


def run_dpbu(
    target_features: FloatArray,
    sources: list[tuple[FloatArray, CameraView]],
    target_camera: CameraView,
    grid: DepthHypothesisGrid,
    unit_shape: tuple[int, int],
    cfg: PipelineConfig,
    base_depth: np.ndarray | None = None,
    counter: ByteCounter | None = None,
    timer: StageTimer | None = None,
    on_layer: Callable[[BoostState], None] | None = None,
) -> tuple[DoubleArray, DoubleArray]:
    """Run one boosting unit.

    Args:
        target_features: ``[h, w, C]`` target features on the warp grid.
        sources: ``(features, camera)`` per source view, cameras at the
            feature grid resolution.
        target_camera: Target camera at the feature grid resolution.
        grid: Candidates shared by all layers.
        unit_shape: ``(H, W)`` of the unit; correlations are upsampled to it.
        cfg: Pipeline configuration.
        base_depth: ``[h, w]`` depth for residual grids.
        counter: Byte counter for the correlation stage.
        timer: Stage timer.
        on_layer: Called with the state after each layer.

    Returns:
        ``(P_M, dD)``: final probabilities ``[H, W, D]`` and the expected
        candidate value ``[H, W]``.
    """
    timer = timer if timer is not None else StageTimer()
    height, width = unit_shape
    probs = uniform_probabilities(height, width, grid.depth_count)
    warps: list[WarpIndexMap] | None = None

    for layer in range(1, cfg.layers_per_unit + 1):
        if warps is None or not cfg.cache_warp_indices:
            with timer.stage("warp"):
                warps = [
                    compute_warp_indices(target_camera, camera, grid, base_depth, cfg.sampling)
                    for _, camera in sources
                ]

        with timer.stage("correlation"):
            volume = multiview_correlation(
                target_features,
                [(features, warp) for (features, _), warp in zip(sources, warps)],
                counter,
            )
        with timer.stage("refine"):
            volume = refine_correlation(volume, cfg.refine_radius)
            volume = upsample_correlation(volume, height, width)
        with timer.stage("softmax"):
            attention = attention_from_correlation(volume, cfg.invalid_fill)
        with timer.stage("boost"):
            probs = boost(probs, attention.probs)

        state = BoostState(probs=probs, layer_index=layer)
        logger.debug(
            f"Layer {layer}: {int(volume.valid.sum())}/{volume.valid.size} valid, "
            f"peak probability {float(probs.max(axis=-1).mean()):.4f}"
        )
        if on_layer is not None:
            on_layer(state)

    return probs, expected_candidate(probs, grid)
