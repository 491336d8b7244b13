"""Cross-view feature correlation over depth candidates.

The sparse path multiplies, slice by slice, a CSR matrix holding the
4 bilinear taps of every target pixel with the flattened source features,
then takes the row-wise dot product with the target features. Only one
``[H·W, C]`` warped slice exists at a time.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse

from warpboost.config.settings import SamplingMode
from warpboost.core.errors import (
    ChannelMismatchError,
    NegativeRadiusError,
    NoSourcesError,
    ShapeMismatchError,
)
from warpboost.epipolar.memory import ByteCounter
from warpboost.geometry.camera import CameraView
from warpboost.geometry.candidates import DepthHypothesisGrid
from warpboost.geometry.depth import bilinear_resize, nearest_resize
from warpboost.geometry.warp import WarpIndexMap, dense_warp_with_validity
from warpboost.tensorio.tensor import BoolArray, FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorrelationVolume:
    """``[H, W, D]`` correlations with a validity mask; invalid values are 0."""

    values: FloatArray
    valid: BoolArray

    def __post_init__(self) -> None:
        if self.values.shape != self.valid.shape:
            raise ShapeMismatchError(
                f"values {self.values.shape} and validity {self.valid.shape} differ"
            )

    @property
    def shape(self) -> tuple[int, int, int]:
        h, w, d = self.values.shape
        return h, w, d


def _check_channels(target: FloatArray, source: FloatArray) -> int:
    if target.shape[-1] != source.shape[-1]:
        raise ChannelMismatchError(
            f"target has {target.shape[-1]} channels, source has {source.shape[-1]}"
        )
    return int(target.shape[-1])


def smm_correlation(
    target_features: FloatArray,
    source_features: FloatArray,
    warp: WarpIndexMap,
    counter: ByteCounter | None = None,
) -> CorrelationVolume:
    """Correlate target features with source features gathered through a warp map.

    ``values[p, k] = <F_tgt[p], sum_q w_q F_src[idx_q]> / sqrt(C)`` where the
    sample is valid, 0 elsewhere.

    Args:
        target_features: ``[H, W, C]`` target features.
        source_features: ``[H_s, W_s, C]`` source features.
        warp: Warp map from the target grid into the source grid.
        counter: Optional byte counter credited with the working buffers.

    Raises:
        ChannelMismatchError: If channel counts differ.
        ShapeMismatchError: If the grids do not match the warp map.
    """
    counter = counter if counter is not None else ByteCounter()
    channels = _check_channels(target_features, source_features)
    height, width, depth = warp.shape
    if target_features.shape[:2] != (height, width):
        raise ShapeMismatchError(
            f"target features {target_features.shape[:2]} do not match warp {height}x{width}"
        )
    if source_features.shape[:2] != warp.source_shape:
        raise ShapeMismatchError(
            f"source features {source_features.shape[:2]} do not match warp {warp.source_shape}"
        )

    pixels = height * width
    source_pixels = warp.source_shape[0] * warp.source_shape[1]
    target_flat = target_features.reshape(pixels, channels).astype(np.float32, copy=False)
    source_flat = source_features.reshape(source_pixels, channels).astype(np.float32, copy=False)
    inv_sqrt = np.float32(1.0 / np.sqrt(channels))
    values = np.zeros((pixels, depth), dtype=np.float32)
    indptr = np.arange(0, 4 * pixels + 1, 4, dtype=np.int32)

    with counter.track(warp.indices, warp.weights, warp.valid, values, indptr):
        for k in range(depth):
            cols = np.ascontiguousarray(warp.indices[:, :, k, :]).reshape(-1)
            data = np.ascontiguousarray(warp.weights[:, :, k, :]).reshape(-1)
            psi = sparse.csr_matrix((data, cols, indptr), shape=(pixels, source_pixels))
            with counter.track(cols, data):
                warped = np.asarray(psi @ source_flat, dtype=np.float32)
                with counter.track(warped):
                    values[:, k] = np.einsum("ic,ic->i", warped, target_flat) * inv_sqrt

    values = values.reshape(height, width, depth)
    values[~warp.valid] = 0.0
    return CorrelationVolume(values=values, valid=warp.valid.copy())


def dense_correlation(
    target_features: FloatArray,
    source_features: FloatArray,
    target: CameraView,
    source: CameraView,
    grid: DepthHypothesisGrid,
    base_depth: np.ndarray | None = None,
    sampling: SamplingMode = SamplingMode.BILINEAR,
    counter: ByteCounter | None = None,
) -> CorrelationVolume:
    """Correlation through a fully materialised warped feature tensor.

    Produces the same values as :func:`smm_correlation` but holds the
    ``[H, W, D, C]`` warped tensor in memory.
    """
    counter = counter if counter is not None else ByteCounter()
    channels = _check_channels(target_features, source_features)

    warped, valid, coord_bytes = dense_warp_with_validity(
        source_features, target, source, grid, base_depth, sampling
    )
    if warped.shape[:2] != target_features.shape[:2]:
        raise ShapeMismatchError(
            f"target features {target_features.shape[:2]} do not match target camera"
        )

    values = np.zeros(valid.shape, dtype=np.float32)
    with counter.track(warped, valid, values, coord_bytes):
        values[...] = np.einsum(
            "hwc,hwdc->hwd", target_features.astype(np.float32, copy=False), warped
        ) / np.float32(np.sqrt(channels))
    values[~valid] = 0.0
    return CorrelationVolume(values=values, valid=valid)


def multiview_correlation(
    target_features: FloatArray,
    sources: list[tuple[FloatArray, WarpIndexMap]],
    counter: ByteCounter | None = None,
) -> CorrelationVolume:
    """Average pairwise correlations over the sources valid at each entry.

    Raises:
        NoSourcesError: If ``sources`` is empty.
    """
    if not sources:
        raise NoSourcesError("multi-view correlation needs at least one source")

    total: np.ndarray | None = None
    count: np.ndarray | None = None
    for source_features, warp in sources:
        pair = smm_correlation(target_features, source_features, warp, counter)
        if total is None or count is None:
            total = np.where(pair.valid, pair.values.astype(np.float64), 0.0)
            count = pair.valid.astype(np.int32)
        else:
            total += np.where(pair.valid, pair.values, 0.0)
            count += pair.valid

    assert total is not None and count is not None
    valid = count > 0
    mean = np.where(valid, total / np.maximum(count, 1), 0.0)
    return CorrelationVolume(values=mean.astype(np.float32), valid=valid)


def refine_correlation(volume: CorrelationVolume, radius: int) -> CorrelationVolume:
    """Box-filter each depth slice over valid entries only.

    Each valid entry becomes the mean of the valid entries in its
    ``(2r+1)×(2r+1)`` neighbourhood, with edges replicated. Invalid entries
    stay invalid and zero.
    """
    if radius < 0:
        raise NegativeRadiusError(f"radius must be non-negative, got {radius}")
    if radius == 0:
        return volume

    size = (2 * radius + 1, 2 * radius + 1, 1)
    weight = volume.valid.astype(np.float64)
    masked = np.where(volume.valid, volume.values.astype(np.float64), 0.0)
    summed = ndimage.uniform_filter(masked, size=size, mode="nearest")
    counts = ndimage.uniform_filter(weight, size=size, mode="nearest")

    ok = volume.valid & (counts > 1e-12)
    refined = np.where(ok, summed / np.where(ok, counts, 1.0), 0.0)
    return CorrelationVolume(values=refined.astype(np.float32), valid=volume.valid.copy())


def upsample_correlation(volume: CorrelationVolume, height: int, width: int) -> CorrelationVolume:
    """Resize each depth slice to ``height``×``width``.

    Values are interpolated bilinearly from valid entries only; validity
    follows the nearest source entry.

    Raises:
        UpsampleOnlyError: If the target is smaller than the volume.
    """
    h, w, depth = volume.shape
    valid = nearest_resize(volume.valid, height, width)
    if (height, width) == (h, w):
        return volume

    values = np.zeros((height, width, depth), dtype=np.float32)
    for k in range(depth):
        mask = volume.valid[:, :, k].astype(np.float64)
        numerator = bilinear_resize(np.where(volume.valid[:, :, k], volume.values[:, :, k], 0.0), height, width)
        denominator = bilinear_resize(mask, height, width)
        covered = valid[:, :, k] & (denominator > 1e-12)
        values[:, :, k] = np.where(covered, numerator / np.where(covered, denominator, 1.0), 0.0)
        valid[:, :, k] = covered
    return CorrelationVolume(values=values, valid=valid)
