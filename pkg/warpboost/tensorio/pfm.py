"""Portable Float Map reading and writing for depth maps.

Only grayscale (``Pf``) maps are supported. Maps are written little-endian
(scale ``-1.0``) with rows stored bottom-up as the format requires.
"""

from pathlib import Path

import numpy as np

from warpboost.core.errors import (
    MalformedHeaderError,
    ShapeMismatchError,
    UnsupportedChannelsError,
)
from warpboost.tensorio.tensor import FloatArray


def write_pfm(depth: FloatArray, path: str | Path) -> None:
    """Write an ``[H, W]`` map as a little-endian grayscale PFM.

    Raises:
        ShapeMismatchError: If the array is not two-dimensional.
    """
    if depth.ndim != 2:
        raise ShapeMismatchError(f"PFM maps must be [H, W], got shape {depth.shape}")

    height, width = depth.shape
    raster = np.ascontiguousarray(np.flipud(depth), dtype="<f4")
    with open(path, "wb") as f:
        f.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        f.write(raster.tobytes())


def read_pfm(path: str | Path) -> FloatArray:
    """Read a grayscale PFM file into an ``[H, W]`` float32 array.

    Raises:
        UnsupportedChannelsError: If the file is a colour (``PF``) map.
        MalformedHeaderError: If the header or raster is malformed.
    """
    with open(path, "rb") as f:
        tag = f.readline().strip()
        if tag == b"PF":
            raise UnsupportedChannelsError(f"{path}: colour PFM maps are not supported")
        if tag != b"Pf":
            raise MalformedHeaderError(f"{path}: unknown PFM tag {tag!r}")

        try:
            width, height = (int(v) for v in f.readline().split())
            scale = float(f.readline().strip())
        except ValueError as e:
            raise MalformedHeaderError(f"{path}: bad PFM header: {e}") from e
        if width <= 0 or height <= 0 or scale == 0.0:
            raise MalformedHeaderError(f"{path}: bad PFM dimensions or scale")

        dtype = "<f4" if scale < 0 else ">f4"
        buf = f.read()

    count = width * height
    if len(buf) < 4 * count:
        raise MalformedHeaderError(
            f"{path}: raster has {len(buf)} bytes, expected {4 * count}"
        )

    raster = np.frombuffer(buf, dtype=dtype, count=count).reshape(height, width)
    return np.flipud(raster).astype(np.float32)
