"""Depth map unprojection and resizing."""

import numpy as np
from scipy import ndimage

from warpboost.core.errors import NonPositiveDepthError, ShapeMismatchError, UpsampleOnlyError
from warpboost.geometry.camera import CameraView, camera_to_world, pixel_rays
from warpboost.tensorio.tensor import DoubleArray, FloatArray


def unproject_depth(depth: np.ndarray, cam: CameraView) -> DoubleArray:
    """Lift a z-depth map to world-space points through pixel centres.

    Args:
        depth: ``[H, W]`` depths matching the camera's image size.
        cam: Camera the depth map was observed from.

    Returns:
        ``[H, W, 3]`` world points.

    Raises:
        NonPositiveDepthError: If any depth is zero, negative or not finite.
        ShapeMismatchError: If the map and camera sizes differ.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != (cam.height, cam.width):
        raise ShapeMismatchError(
            f"depth map {depth.shape} does not match camera {cam.height}x{cam.width}"
        )
    if not np.all(np.isfinite(depth)) or np.any(depth <= 0):
        raise NonPositiveDepthError("depth map contains non-positive or non-finite values")
    return camera_to_world(cam, pixel_rays(cam) * depth[..., None])


def _source_coordinates(size: int, target: int) -> DoubleArray:
    """Half-pixel aligned source grid positions of ``target`` output samples."""
    coords = (np.arange(target, dtype=np.float64) + 0.5) * (size / target) - 0.5
    return np.clip(coords, 0.0, size - 1.0)


def bilinear_resize(array: np.ndarray, height: int, width: int) -> DoubleArray:
    """Bilinearly upsample a 2-D array with pixel centres aligned.

    Output pixel centres map back to the input through
    ``(y + 0.5) * h / H - 0.5``; positions beyond the outer centres take the
    edge value.

    Raises:
        UpsampleOnlyError: If the requested size is smaller than the input.
    """
    h, w = array.shape
    if height < h or width < w:
        raise UpsampleOnlyError(f"cannot resize {h}x{w} down to {height}x{width}")
    if (height, width) == (h, w):
        return np.array(array, dtype=np.float64)

    rows = _source_coordinates(h, height)
    cols = _source_coordinates(w, width)
    grid_y, grid_x = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(
        np.asarray(array, dtype=np.float64),
        [grid_y, grid_x],
        order=1,
        mode="nearest",
    )


def nearest_resize(array: np.ndarray, height: int, width: int) -> np.ndarray:
    """Upsample a 2-D array by picking the input pixel containing each output centre."""
    h, w = array.shape[:2]
    if height < h or width < w:
        raise UpsampleOnlyError(f"cannot resize {h}x{w} down to {height}x{width}")
    rows = np.minimum(((np.arange(height) + 0.5) * h / height).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(width) + 0.5) * w / width).astype(np.int64), w - 1)
    return array[rows[:, None], cols[None, :]]


def resize_depth(depth: np.ndarray, height: int, width: int) -> FloatArray:
    """Upsample a depth map to ``height``×``width`` by bilinear interpolation.

    Raises:
        UpsampleOnlyError: If either dimension would shrink.
    """
    return bilinear_resize(depth, height, width).astype(np.float32)
