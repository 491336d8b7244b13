"""Dense float32 tensors and the TNSR binary file format.

A TNSR file is laid out little-endian as::

    magic   4 bytes   b"TNSR"
    version u32       1
    ndim    u32       number of dimensions (at most 8)
    shape   u64[ndim]
    payload f32[prod(shape)] row-major

Arrays round-trip bit-exactly, NaN payloads included. Rejecting non-finite
values is left to :func:`validate_finite`, which callers apply where the data
must be usable.
"""

import struct
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from warpboost.core.errors import (
    BadMagicError,
    NonFiniteTensorError,
    TooManyDimensionsError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

FloatArray = npt.NDArray[np.float32]
DoubleArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int32]
BoolArray = npt.NDArray[np.bool_]
AnyArray = npt.NDArray[Any]

MAGIC = b"TNSR"
VERSION = 1
MAX_NDIM = 8

_HEADER = struct.Struct("<4sII")


def save_tensor(tensor: npt.ArrayLike, path: str | Path) -> None:
    """Write an array to a TNSR file.

    Args:
        tensor: Array to store; converted to little-endian float32.
        path: Destination file.

    Raises:
        TooManyDimensionsError: If the array has more than 8 dimensions.
    """
    array = np.ascontiguousarray(tensor, dtype="<f4")
    if array.ndim > MAX_NDIM:
        raise TooManyDimensionsError(
            f"Tensor has {array.ndim} dimensions, the format allows {MAX_NDIM}"
        )

    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, array.ndim))
        f.write(struct.pack(f"<{array.ndim}Q", *array.shape))
        f.write(array.tobytes(order="C"))


def load_tensor(path: str | Path) -> FloatArray:
    """Read a TNSR file.

    Args:
        path: File to read.

    Returns:
        Native-endian float32 array with the stored shape.

    Raises:
        BadMagicError: If the file does not start with ``TNSR``.
        UnsupportedVersionError: If the version is not 1.
        TooManyDimensionsError: If the header declares more than 8 dimensions.
        TruncatedPayloadError: If the header or payload is cut short.
    """
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a TNSR file (magic {data[:4]!r})")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: header truncated")

    _, version, ndim = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported TNSR version {version}")
    if ndim > MAX_NDIM:
        raise TooManyDimensionsError(f"{path}: {ndim} dimensions exceeds {MAX_NDIM}")

    offset = _HEADER.size
    shape_bytes = 8 * ndim
    if len(data) < offset + shape_bytes:
        raise TruncatedPayloadError(f"{path}: shape truncated")
    shape = struct.unpack_from(f"<{ndim}Q", data, offset)
    offset += shape_bytes

    count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    expected = offset + 4 * count
    if len(data) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(data) - offset} bytes, expected {4 * count}"
        )

    payload = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    return payload.astype(np.float32).reshape(shape)


def validate_finite(tensor: AnyArray, name: str = "tensor") -> None:
    """Reject arrays containing NaN or infinity.

    Raises:
        NonFiniteTensorError: If any value is not finite.
    """
    if not np.all(np.isfinite(tensor)):
        bad = int(np.count_nonzero(~np.isfinite(tensor)))
        raise NonFiniteTensorError(f"{name} contains {bad} non-finite values")
