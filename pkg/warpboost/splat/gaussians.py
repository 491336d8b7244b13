"""Pixel-aligned 3D Gaussians.

A raw parameter map carries 8 channels per pixel:

    [0:3] scale pre-activations   s = s_min + softplus(raw) * s_scale
    [3:7] quaternion (w, x, y, z) normalised, identity when degenerate
    [7]   opacity pre-activation  alpha = logistic(raw)

Means come from unprojecting the depth map; colours are the pixel colours.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation
from scipy.special import expit, logit

from warpboost.config.settings import SplatConfig
from warpboost.core.errors import InsufficientChannelsError, ShapeMismatchError
from warpboost.geometry.camera import CameraView
from warpboost.geometry.depth import unproject_depth
from warpboost.tensorio.tensor import DoubleArray, load_tensor, save_tensor

logger = logging.getLogger(__name__)

RAW_CHANNELS = 8
QUATERNION_FLOOR = 1e-8
IDENTITY_QUATERNION = np.array([1.0, 0.0, 0.0, 0.0])
BUNDLE_MANIFEST = "gaussians.json"
_FIELDS = ("means", "opacities", "scales", "rotations", "colors")


@dataclass(frozen=True, eq=False)
class GaussianSet:
    """``N`` Gaussians with mean, opacity, scale, rotation and colour."""

    means: DoubleArray
    opacities: DoubleArray
    scales: DoubleArray
    rotations: DoubleArray
    colors: DoubleArray

    def __post_init__(self) -> None:
        count = self.means.shape[0]
        expected = {
            "means": (count, 3),
            "opacities": (count,),
            "scales": (count, 3),
            "rotations": (count, 4),
            "colors": (count, 3),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeMismatchError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    def __len__(self) -> int:
        return int(self.means.shape[0])

    @classmethod
    def empty(cls) -> "GaussianSet":
        return cls(
            means=np.zeros((0, 3)),
            opacities=np.zeros(0),
            scales=np.zeros((0, 3)),
            rotations=np.zeros((0, 4)),
            colors=np.zeros((0, 3)),
        )

    @classmethod
    def concat(cls, sets: list["GaussianSet"]) -> "GaussianSet":
        """Join sets in order; the result's indices follow list order."""
        if not sets:
            return cls.empty()
        return cls(
            **{name: np.concatenate([getattr(s, name) for s in sets]) for name in _FIELDS}
        )

    def rotation_matrices(self) -> DoubleArray:
        """``[N, 3, 3]`` rotation of each Gaussian."""
        if len(self) == 0:
            return np.zeros((0, 3, 3))
        # scipy expects scalar-last quaternions
        return Rotation.from_quat(self.rotations[:, [1, 2, 3, 0]]).as_matrix()

    def covariances(self) -> DoubleArray:
        """``[N, 3, 3]`` world covariances ``R diag(s^2) R^T``."""
        rot = self.rotation_matrices()
        return np.einsum("nij,nj,nkj->nik", rot, self.scales**2, rot)


def softplus(x: np.ndarray) -> DoubleArray:
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def inverse_softplus(y: np.ndarray) -> DoubleArray:
    """Inverse of :func:`softplus` for positive ``y``."""
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


def decode_gaussians(
    raw: np.ndarray,
    depth: np.ndarray,
    cam: CameraView,
    colors: np.ndarray,
    cfg: SplatConfig | None = None,
) -> GaussianSet:
    """Turn a raw parameter map into one Gaussian per pixel.

    Args:
        raw: ``[H, W, K]`` raw parameters, ``K >= 8``.
        depth: ``[H, W]`` positive z-depths.
        cam: Camera the map belongs to.
        colors: ``[H, W, 3]`` pixel colours.
        cfg: Activation constants.

    Raises:
        InsufficientChannelsError: If ``K < 8``.
        NonPositiveDepthError: If a depth is not positive.
    """
    cfg = cfg or SplatConfig()
    if raw.ndim != 3 or raw.shape[-1] < RAW_CHANNELS:
        raise InsufficientChannelsError(
            f"raw parameters need at least {RAW_CHANNELS} channels, got shape {raw.shape}"
        )
    if raw.shape[:2] != np.shape(depth) or np.shape(colors)[:2] != np.shape(depth):
        raise ShapeMismatchError("raw parameters, depth and colours must share H and W")

    flat = np.asarray(raw, dtype=np.float64).reshape(-1, raw.shape[-1])
    means = unproject_depth(depth, cam).reshape(-1, 3)

    scales = cfg.s_min + softplus(flat[:, 0:3]) * cfg.s_scale

    quats = flat[:, 3:7]
    norms = np.linalg.norm(quats, axis=1)
    degenerate = norms < QUATERNION_FLOOR
    safe = np.where(degenerate, 1.0, norms)[:, None]
    quats = np.where(degenerate[:, None], IDENTITY_QUATERNION, quats / safe)

    return GaussianSet(
        means=means,
        opacities=expit(flat[:, 7]),
        scales=scales,
        rotations=quats,
        colors=np.asarray(colors, dtype=np.float64).reshape(-1, 3),
    )


def initial_raw_parameters(depth: np.ndarray, cam: CameraView, cfg: SplatConfig | None = None) -> DoubleArray:
    """Raw parameters for isotropic splats sized to a fraction of the pixel footprint.

    The footprint of a pixel at depth ``d`` is ``d / fx`` scene units; each
    splat gets scale ``footprint_factor * d / fx``, identity rotation and
    the configured opacity.
    """
    cfg = cfg or SplatConfig()
    depth = np.asarray(depth, dtype=np.float64)
    target = cfg.footprint_factor * depth / cam.intrinsics.fx
    activation = np.maximum(target - cfg.s_min, 1e-8) / cfg.s_scale

    raw = np.zeros((*depth.shape, RAW_CHANNELS), dtype=np.float64)
    raw[..., 0:3] = inverse_softplus(activation)[..., None]
    raw[..., 3] = 1.0
    raw[..., 7] = logit(cfg.opacity)
    return raw


def save_gaussians(gaussians: GaussianSet, directory: str | Path) -> None:
    """Write a set as TNSR arrays plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in _FIELDS:
        file_name = f"{name}.tnsr"
        save_tensor(getattr(gaussians, name), directory / file_name)
        files[name] = file_name
    manifest = {"format": 1, "count": len(gaussians), "files": files}
    (directory / BUNDLE_MANIFEST).write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    logger.debug(f"Saved {len(gaussians)} Gaussians to {directory}")


def load_gaussians(directory: str | Path) -> GaussianSet:
    """Read a set written by :func:`save_gaussians`."""
    directory = Path(directory)
    manifest_path = directory / BUNDLE_MANIFEST
    if not manifest_path.exists():
        raise FileNotFoundError(f"Gaussian manifest not found: {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    arrays = {
        name: load_tensor(directory / manifest["files"][name]).astype(np.float64)
        for name in _FIELDS
    }
    count = int(manifest["count"])
    arrays["opacities"] = arrays["opacities"].reshape(count)
    for name in ("means", "scales", "colors"):
        arrays[name] = arrays[name].reshape(count, 3)
    arrays["rotations"] = arrays["rotations"].reshape(count, 4)
    return GaussianSet(**arrays)
