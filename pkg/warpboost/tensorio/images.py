"""8-bit PNG images mapped to float RGB in ``[0, 1]``."""

from pathlib import Path

import numpy as np
from PIL import Image

from warpboost.core.errors import ShapeMismatchError
from warpboost.tensorio.tensor import FloatArray


def read_png(path: str | Path) -> FloatArray:
    """Decode an 8-bit PNG into an ``[H, W, 3]`` float32 array in ``[0, 1]``.

    Grayscale images are expanded to RGB and alpha channels are dropped.
    """
    with Image.open(path) as image:
        rgb = image.convert("RGB")
        data = np.asarray(rgb, dtype=np.uint8)
    return data.astype(np.float32) / 255.0


def write_png(image: FloatArray, path: str | Path) -> None:
    """Encode an ``[H, W, 3]`` array in ``[0, 1]`` as an 8-bit RGB PNG.

    Values are clipped to ``[0, 1]`` and rounded to the nearest code.
    """
    if image.ndim != 3 or image.shape[-1] != 3:
        raise ShapeMismatchError(f"PNG images must be [H, W, 3], got {image.shape}")
    codes = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(codes).save(path, format="PNG")
