"""Deterministic per-view feature maps.

The pyramid recipe stacks channels that make plane-sweep matching
well-posed on textured scenes:

    RGB | d/dx grey, d/dy grey | box-blurred RGB per radius | local variance

after area-averaging the image down by ``scale``. Channels are then
optionally standardised and truncated or zero-padded to the configured
count. Finally every pixel's vector is rescaled to a common length, so the
1/sqrt(C) correlation of two pixels is ``match_logit`` times their cosine
similarity whatever the channel count.
"""

import logging
from pathlib import Path

import numpy as np
from scipy import ndimage

from warpboost.config.settings import FeatureKind, FeatureProviderConfig
from warpboost.core.errors import FeatureScaleError, FeatureSourceError
from warpboost.tensorio.tensor import (
    DoubleArray,
    FloatArray,
    load_tensor,
    validate_finite,
)

logger = logging.getLogger(__name__)

SUPPORTED_SCALES = (1, 2, 4)


def area_downsample(array: np.ndarray, scale: int) -> DoubleArray:
    """Average non-overlapping ``scale``×``scale`` blocks of an ``[H, W, ...]`` array.

    Raises:
        FeatureScaleError: If ``scale`` does not divide both spatial dims.
    """
    height, width = array.shape[:2]
    if scale < 1 or height % scale or width % scale:
        raise FeatureScaleError(f"scale {scale} does not divide image size {width}x{height}")
    if scale == 1:
        return np.asarray(array, dtype=np.float64)
    blocks = array.reshape(height // scale, scale, width // scale, scale, *array.shape[2:])
    return blocks.mean(axis=(1, 3), dtype=np.float64)


def pyramid_features(image: FloatArray, cfg: FeatureProviderConfig, scale: int) -> FloatArray:
    """Compute deterministic features for one image.

    Args:
        image: ``[H, W, 3]`` RGB image in ``[0, 1]``.
        cfg: Feature configuration; ``cfg.channels`` sets the output depth.
        scale: Downsampling factor, one of 1, 2 or 4.

    Returns:
        ``[H/scale, W/scale, cfg.channels]`` float32 features.

    Raises:
        FeatureScaleError: If ``scale`` is unsupported or does not divide H and W.
    """
    if scale not in SUPPORTED_SCALES:
        raise FeatureScaleError(f"feature scale must be one of {SUPPORTED_SCALES}, got {scale}")

    rgb = area_downsample(image, scale)
    grey = rgb.mean(axis=2)

    if min(grey.shape) > 1:
        grad_y, grad_x = np.gradient(grey)
    else:
        grad_y = grad_x = np.zeros_like(grey)

    channels: list[DoubleArray] = [rgb, grad_x[..., None], grad_y[..., None]]
    for level in range(1, cfg.levels + 1):
        radius = 2**level
        size = 2 * radius + 1
        channels.append(ndimage.uniform_filter(rgb, size=(size, size, 1), mode="nearest"))

    local_mean = ndimage.uniform_filter(grey, size=3, mode="nearest")
    local_sq = ndimage.uniform_filter(grey * grey, size=3, mode="nearest")
    channels.append(np.maximum(local_sq - local_mean * local_mean, 0.0)[..., None])

    stack = np.concatenate(channels, axis=2)
    if cfg.standardize:
        stack = _standardize(stack)

    stack = _fit_channels(stack, cfg.channels)
    if cfg.match_logit is not None:
        stack = _fix_length(stack, cfg.match_logit)
    return stack.astype(np.float32)


def _fix_length(stack: DoubleArray, match_logit: float) -> DoubleArray:
    """Rescale each pixel vector so that ``|f|^2 / sqrt(C) == match_logit``.

    All-zero vectors stay zero.
    """
    length = np.sqrt(match_logit * np.sqrt(stack.shape[2]))
    norms = np.linalg.norm(stack, axis=2, keepdims=True)
    ok = norms > 1e-8
    return np.where(ok, stack * (length / np.where(ok, norms, 1.0)), 0.0)


def _standardize(stack: DoubleArray) -> DoubleArray:
    """Zero-mean, unit-variance per channel; constant channels become zero."""
    mean = stack.mean(axis=(0, 1), keepdims=True)
    std = stack.std(axis=(0, 1), keepdims=True)
    centred = stack - mean
    safe = np.where(std > 1e-8, std, 1.0)
    return np.where(std > 1e-8, centred / safe, 0.0)


def _fit_channels(stack: DoubleArray, channels: int) -> DoubleArray:
    have = stack.shape[2]
    if have >= channels:
        return stack[:, :, :channels]
    pad = np.zeros((*stack.shape[:2], channels - have), dtype=stack.dtype)
    return np.concatenate([stack, pad], axis=2)


def feature_file_name(view_index: int, scale: int) -> str:
    """Name of an external feature file for one view and scale."""
    return f"view_{view_index:02d}_s{scale}.tnsr"


class FeatureProvider:
    """Supplies feature maps for the views of a scene.

    Pyramid features are computed from the image; external features are
    loaded from ``cfg.source_path`` and checked against the expected shape.
    Results are memoised per (view, scale).
    """

    def __init__(self, cfg: FeatureProviderConfig | None = None) -> None:
        self.cfg = cfg or FeatureProviderConfig()
        self._cache: dict[tuple[int, int], FloatArray] = {}

    @property
    def channels(self) -> int:
        """Number of channels every returned map has."""
        return self.cfg.channels

    def features(self, view_index: int, image: FloatArray, scale: int) -> FloatArray:
        """Return ``[H/scale, W/scale, C]`` features for one view."""
        key = (view_index, scale)
        if key not in self._cache:
            if self.cfg.kind == FeatureKind.EXTERNAL:
                self._cache[key] = self._load_external(view_index, image, scale)
            else:
                self._cache[key] = pyramid_features(image, self.cfg, scale)
            logger.debug(
                f"Features for view {view_index} at scale {scale}: "
                f"{self._cache[key].shape}"
            )
        return self._cache[key]

    def _load_external(self, view_index: int, image: FloatArray, scale: int) -> FloatArray:
        assert self.cfg.source_path is not None
        path = Path(self.cfg.source_path) / feature_file_name(view_index, scale)
        if not path.exists():
            raise FeatureSourceError(f"Feature file not found: {path}")

        tensor = load_tensor(path)
        height, width = image.shape[:2]
        expected = (height // scale, width // scale, self.cfg.channels)
        if tensor.shape != expected:
            raise FeatureSourceError(f"{path}: expected shape {expected}, got {tensor.shape}")
        validate_finite(tensor, str(path))
        return tensor

    def clear(self) -> None:
        """Drop memoised feature maps."""
        self._cache.clear()
