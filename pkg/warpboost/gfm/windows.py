"""Window partitioning with optional cyclic shift.

Windows are numbered row-major over the (shifted) map; tokens inside a
window are numbered row-major too, so token ``j`` sits at row
``j // window`` and column ``j % window``.
"""

import numpy as np

from warpboost.core.errors import IndivisibleWindowError, InvalidShiftError
from warpboost.tensorio.tensor import BoolArray


def check_window(height: int, width: int, window: int, shift: int) -> None:
    """Validate a window size and shift for an ``height``×``width`` map.

    Raises:
        IndivisibleWindowError: If the window does not tile the map.
        InvalidShiftError: If the shift is neither 0 nor half the window.
    """
    if window < 1 or height % window or width % window:
        raise IndivisibleWindowError(f"{height}x{width} map is not tiled by window {window}")
    if shift != 0 and (window % 2 or shift != window // 2):
        raise InvalidShiftError(f"shift must be 0 or {window / 2}, got {shift}")


def window_partition(features: np.ndarray, window: int, shift: int = 0) -> np.ndarray:
    """Split ``[H, W, C]`` features into ``[num_windows, window², C]`` tiles.

    The map is first rolled up and left by ``shift``.
    """
    height, width, channels = features.shape
    check_window(height, width, window, shift)
    if shift:
        features = np.roll(features, (-shift, -shift), axis=(0, 1))
    tiles = features.reshape(height // window, window, width // window, window, channels)
    return tiles.transpose(0, 2, 1, 3, 4).reshape(-1, window * window, channels)


def window_reverse(windows: np.ndarray, window: int, height: int, width: int, shift: int = 0) -> np.ndarray:
    """Inverse of :func:`window_partition`."""
    check_window(height, width, window, shift)
    channels = windows.shape[-1]
    tiles = windows.reshape(height // window, width // window, window, window, channels)
    features = tiles.transpose(0, 2, 1, 3, 4).reshape(height, width, channels)
    if shift:
        features = np.roll(features, (shift, shift), axis=(0, 1))
    return features


def region_mask(height: int, width: int, window: int, shift: int) -> BoolArray:
    """Which token pairs may attend to each other, per window.

    After a cyclic shift the windows along the bottom and right edges mix
    tokens that were not adjacent before the shift; pairs from different
    pre-shift regions are disallowed.

    Returns:
        ``[num_windows, window², window²]`` boolean array, True where allowed.
    """
    check_window(height, width, window, shift)
    count = (height // window) * (width // window)
    tokens = window * window
    if shift == 0:
        return np.ones((count, tokens, tokens), dtype=bool)

    labels = np.zeros((height, width, 1), dtype=np.int64)
    bands = (slice(0, -window), slice(-window, -shift), slice(-shift, None))
    label = 0
    for rows in bands:
        for cols in bands:
            labels[rows, cols, 0] = label
            label += 1

    # labels are defined in the shifted frame
    tiles = window_partition(labels, window, 0)[..., 0]
    return tiles[:, :, None] == tiles[:, None, :]
