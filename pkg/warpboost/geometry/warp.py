"""Warping target pixels into a source view.

Two paths share the same correspondences:

* :func:`compute_warp_indices` records, for every target pixel and depth
  candidate, the flat ids and bilinear weights of the 4 source neighbours.
  Correlation is then a sparse gather.
* :func:`dense_warp` materialises the warped ``[H, W, D, C]`` feature
  tensor with :func:`scipy.ndimage.map_coordinates`; it is the reference the
  index path is checked against.

Sampling positions are grid coordinates (continuous pixel coordinate minus
0.5). Positions within :data:`SNAP_TOLERANCE` of an integer are snapped so
that identical cameras warp each pixel onto itself exactly. Neighbours that
fall outside the source grid are dropped and the remaining weights
renormalised; a sample is invalid when it lies behind the source camera or
keeps no weight.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from warpboost.config.settings import SamplingMode
from warpboost.core.errors import ShapeMismatchError
from warpboost.geometry.camera import CameraView, camera_to_world, pixel_rays, project_points
from warpboost.geometry.candidates import DepthHypothesisGrid
from warpboost.tensorio.tensor import BoolArray, DoubleArray, FloatArray, IndexArray

logger = logging.getLogger(__name__)

DEPTH_EPSILON = 1e-6
SNAP_TOLERANCE = 1e-5
WEIGHT_EPSILON = 1e-12


@dataclass(frozen=True, eq=False)
class WarpIndexMap:
    """Sparse description of a warp from a target grid into a source grid.

    Attributes:
        indices: ``[H, W, D, 4]`` int32 flat source ids (``y * W_s + x``).
        weights: ``[H, W, D, 4]`` float32 bilinear weights summing to 1
            where valid and 0 elsewhere.
        valid: ``[H, W, D]`` sample validity.
        source_shape: ``(H_s, W_s)`` of the source grid.
    """

    indices: IndexArray
    weights: FloatArray
    valid: BoolArray
    source_shape: tuple[int, int]

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(H, W, D)`` of the target grid and candidates."""
        h, w, d = self.valid.shape
        return h, w, d

    @property
    def nbytes(self) -> int:
        """Bytes held by the index, weight and validity arrays."""
        return self.indices.nbytes + self.weights.nbytes + self.valid.nbytes


def project_candidates(
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None = None,
) -> tuple[DoubleArray, DoubleArray]:
    """Project every (target pixel, candidate depth) into the source camera.

    Returns:
        ``(uv, z)``: ``[H, W, D, 2]`` continuous source pixel coordinates and
        ``[H, W, D]`` source-camera depths.
    """
    height, width = target.height, target.width
    if base_depth is not None and np.shape(base_depth) != (height, width):
        raise ShapeMismatchError(
            f"base depth {np.shape(base_depth)} does not match target grid {height}x{width}"
        )

    depths = grid.depths(base_depth)
    if depths.ndim == 1:
        depths = np.broadcast_to(depths, (height, width, depths.size))
    elif depths.shape[:2] != (height, width):
        raise ShapeMismatchError(f"candidate grid {depths.shape} does not match {height}x{width}")

    rays = pixel_rays(target)
    cam_points = rays[:, :, None, :] * depths[..., None]
    world = camera_to_world(target, cam_points)
    return project_points(source, world)


def _grid_positions(uv: DoubleArray) -> tuple[DoubleArray, DoubleArray]:
    """Continuous pixel coordinates to snapped grid coordinates ``(gx, gy)``."""
    grid = uv - 0.5
    rounded = np.round(grid)
    grid = np.where(np.abs(grid - rounded) < SNAP_TOLERANCE, rounded, grid)
    return grid[..., 0], grid[..., 1]


def compute_warp_indices(
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None = None,
    sampling: SamplingMode = SamplingMode.BILINEAR,
) -> WarpIndexMap:
    """Record the source samples every target pixel reads at every candidate.

    Args:
        target: Camera of the target feature grid.
        source: Camera of the source feature grid.
        grid: Depth candidates; residual grids need ``base_depth``.
        base_depth: ``[H, W]`` depth the residual offsets are added to.
        sampling: Bilinear (4 neighbours) or nearest (1 neighbour).

    Returns:
        The warp index map.

    Raises:
        MissingBaseDepthError: If a residual grid has no base depth.
    """
    uv, z = project_candidates(target, source, grid, base_depth)
    gx, gy = _grid_positions(uv)
    src_h, src_w = source.height, source.width
    in_front = (z > DEPTH_EPSILON) & np.isfinite(gx) & np.isfinite(gy)
    gx = np.where(in_front, gx, -2.0)
    gy = np.where(in_front, gy, -2.0)

    if sampling == SamplingMode.NEAREST:
        xs = np.floor(gx + 0.5)[..., None]
        ys = np.floor(gy + 0.5)[..., None]
        taps = np.zeros((*gx.shape, 4), dtype=np.float64)
        taps[..., 0] = 1.0
        xs = np.repeat(xs, 4, axis=-1)
        ys = np.repeat(ys, 4, axis=-1)
    else:
        x0 = np.floor(gx)
        y0 = np.floor(gy)
        fx = gx - x0
        fy = gy - y0
        xs = np.stack([x0, x0 + 1, x0, x0 + 1], axis=-1)
        ys = np.stack([y0, y0, y0 + 1, y0 + 1], axis=-1)
        taps = np.stack(
            [(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy],
            axis=-1,
        )

    inside = (xs >= 0) & (xs <= src_w - 1) & (ys >= 0) & (ys <= src_h - 1)
    taps = np.where(inside & in_front[..., None], taps, 0.0)
    total = taps.sum(axis=-1)
    valid = in_front & (total > WEIGHT_EPSILON)

    weights = np.where(valid[..., None], taps / np.where(valid, total, 1.0)[..., None], 0.0)
    flat = np.clip(ys, 0, src_h - 1) * src_w + np.clip(xs, 0, src_w - 1)
    indices = np.where(valid[..., None], flat, 0).astype(np.int32)

    logger.debug(
        f"Warp indices {valid.shape}: {int(valid.sum())}/{valid.size} valid samples"
    )
    return WarpIndexMap(
        indices=indices,
        weights=weights.astype(np.float32),
        valid=valid,
        source_shape=(src_h, src_w),
    )


def gather_features(features: FloatArray, warp: WarpIndexMap) -> FloatArray:
    """Apply a warp index map to source features, producing ``[H, W, D, C]``."""
    src_h, src_w, channels = features.shape
    if (src_h, src_w) != warp.source_shape:
        raise ShapeMismatchError(
            f"features {features.shape[:2]} do not match warp source {warp.source_shape}"
        )
    flat = features.reshape(-1, channels).astype(np.float32, copy=False)
    out = np.zeros((*warp.valid.shape, channels), dtype=np.float32)
    for tap in range(4):
        out += warp.weights[..., tap, None] * flat[warp.indices[..., tap]]
    return out


def _dense_sample(
    features: FloatArray,
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None,
    sampling: SamplingMode,
) -> tuple[FloatArray, BoolArray, int]:
    """Warp features densely; returns the tensor, validity and coordinate bytes."""
    src_h, src_w, channels = features.shape
    if (src_h, src_w) != (source.height, source.width):
        raise ShapeMismatchError(
            f"features {features.shape[:2]} do not match source camera {source.height}x{source.width}"
        )

    uv, z = project_candidates(target, source, grid, base_depth)
    gx, gy = _grid_positions(uv)
    in_front = (z > DEPTH_EPSILON) & np.isfinite(gx) & np.isfinite(gy)
    gx = np.where(in_front, gx, -2.0)
    gy = np.where(in_front, gy, -2.0)
    coords = np.stack([gy, gx])
    source_values = np.asarray(features, dtype=np.float64)

    if sampling == SamplingMode.NEAREST:
        xs = np.floor(gx + 0.5).astype(np.int64)
        ys = np.floor(gy + 0.5).astype(np.int64)
        valid = in_front & (xs >= 0) & (xs < src_w) & (ys >= 0) & (ys < src_h)
        picked = source_values[np.clip(ys, 0, src_h - 1), np.clip(xs, 0, src_w - 1)]
        warped = np.where(valid[..., None], picked, 0.0)
        return warped.astype(np.float32), valid, coords.nbytes

    coverage = ndimage.map_coordinates(
        np.ones((src_h, src_w)), coords, order=1, mode="grid-constant", cval=0.0
    )
    valid = in_front & (coverage > WEIGHT_EPSILON)
    safe = np.where(valid, coverage, 1.0)

    warped = np.zeros((*valid.shape, channels), dtype=np.float32)
    for c in range(channels):
        sampled = ndimage.map_coordinates(
            source_values[:, :, c], coords, order=1, mode="grid-constant", cval=0.0
        )
        warped[..., c] = np.where(valid, sampled / safe, 0.0)
    return warped, valid, coords.nbytes


def dense_warp(
    features: FloatArray,
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None = None,
    sampling: SamplingMode = SamplingMode.BILINEAR,
) -> FloatArray:
    """Sample source features at every (target pixel, candidate) correspondence.

    Invalid samples are zero. Memory grows as ``H·W·D·C``.

    Returns:
        ``[H, W, D, C]`` float32 warped features.
    """
    warped, _, _ = _dense_sample(features, target, source, grid, base_depth, sampling)
    return warped


def dense_warp_with_validity(
    features: FloatArray,
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None = None,
    sampling: SamplingMode = SamplingMode.BILINEAR,
) -> tuple[FloatArray, BoolArray, int]:
    """Like :func:`dense_warp` but also returns validity and coordinate bytes."""
    return _dense_sample(features, target, source, grid, base_depth, sampling)
