"""Image quality metrics."""

import numpy as np
from skimage.metrics import structural_similarity

from warpboost.core.errors import ShapeMismatchError

PSNR_CAP = 99.0
MSE_FLOOR = 1e-10


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"images differ in shape: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images in ``[0, 1]``, capped at 99."""
    _check_pair(a, b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mse = float(np.mean(diff * diff))
    if mse < MSE_FLOOR:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * float(np.log10(1.0 / mse)))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM with an 11×11 Gaussian window (sigma 1.5, K1 0.01, K2 0.03).

    Both images must be at least 11 pixels on each side.
    """
    _check_pair(a, b)
    if min(a.shape[:2]) < 11:
        raise ShapeMismatchError(f"SSIM needs images of at least 11x11, got {a.shape[:2]}")
    return float(
        structural_similarity(
            np.asarray(a, dtype=np.float64),
            np.asarray(b, dtype=np.float64),
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
            K1=0.01,
            K2=0.03,
            data_range=1.0,
            channel_axis=-1 if np.ndim(a) == 3 else None,
        )
    )
