"""Pinhole cameras and point projection.

Conventions:
    * Poses map world to camera: ``X_cam = R @ X_world + t``.
    * Depth is the camera-space z coordinate.
    * Pixel ``(x, y)`` covers ``[x, x+1) × [y, y+1)``; its centre is at
      continuous coordinate ``(x + 0.5, y + 0.5)``. ``cx``/``cy`` are given in
      the same continuous coordinates.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from warpboost.core.errors import (
    InvalidIntrinsicsError,
    MissingPosesError,
    NonOrthonormalRotationError,
)
from warpboost.tensorio.tensor import DoubleArray

logger = logging.getLogger(__name__)

ROTATION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidIntrinsicsError(f"focal lengths must be positive, got {self.fx}, {self.fy}")
        if self.width < 1 or self.height < 1:
            raise InvalidIntrinsicsError(f"image size must be positive, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidIntrinsicsError(
                f"principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height}"
            )

    @property
    def matrix(self) -> DoubleArray:
        """The 3×3 calibration matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]],
            dtype=np.float64,
        )

    def scaled(self, scale: int) -> "Intrinsics":
        """Intrinsics of a grid coarser by an integer factor."""
        if scale < 1 or self.width % scale or self.height % scale:
            raise InvalidIntrinsicsError(
                f"scale {scale} does not divide image size {self.width}x{self.height}"
            )
        return Intrinsics(
            fx=self.fx / scale,
            fy=self.fy / scale,
            cx=self.cx / scale,
            cy=self.cy / scale,
            width=self.width // scale,
            height=self.height // scale,
        )


@dataclass(frozen=True, eq=False)
class Pose:
    """World-to-camera rigid transform."""

    rotation: DoubleArray
    translation: DoubleArray

    def __post_init__(self) -> None:
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        orthogonality = np.abs(rotation.T @ rotation - np.eye(3)).max()
        determinant = float(np.linalg.det(rotation))
        if orthogonality > ROTATION_TOLERANCE or abs(determinant - 1.0) > ROTATION_TOLERANCE:
            raise NonOrthonormalRotationError(
                f"rotation is not orthonormal (|RᵀR - I| = {orthogonality:.3g}, det = {determinant:.6f})"
            )
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @property
    def center(self) -> DoubleArray:
        """Camera centre in world coordinates."""
        return -self.rotation.T @ self.translation


@dataclass(frozen=True, eq=False)
class CameraView:
    """One calibrated input view.

    Build instances with :func:`build_camera`; ``projection`` is derived.
    """

    intrinsics: Intrinsics
    pose: Pose
    projection: DoubleArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        extrinsics = np.hstack([self.pose.rotation, self.pose.translation[:, None]])
        object.__setattr__(self, "projection", self.intrinsics.matrix @ extrinsics)

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height

    def rescaled(self, scale: int) -> "CameraView":
        """The same camera observing a grid ``scale`` times coarser."""
        if scale == 1:
            return self
        return CameraView(self.intrinsics.scaled(scale), self.pose)

    def to_dict(self) -> dict[str, Any]:
        """Serialise to the poses JSON record."""
        k = self.intrinsics
        return {
            "fx": k.fx,
            "fy": k.fy,
            "cx": k.cx,
            "cy": k.cy,
            "width": k.width,
            "height": k.height,
            "R": [float(v) for v in self.pose.rotation.reshape(-1)],
            "t": [float(v) for v in self.pose.translation],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CameraView":
        """Parse a poses JSON record."""
        intrinsics = Intrinsics(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            width=int(data["width"]),
            height=int(data["height"]),
        )
        pose = Pose(np.array(data["R"], dtype=np.float64), np.array(data["t"], dtype=np.float64))
        return build_camera(intrinsics, pose)


def build_camera(intrinsics: Intrinsics, pose: Pose) -> CameraView:
    """Assemble a camera and its 3×4 projection ``K [R | t]``."""
    return CameraView(intrinsics, pose)


def project_points(cam: CameraView, points: np.ndarray) -> tuple[DoubleArray, DoubleArray]:
    """Project world points into a camera.

    Args:
        cam: Camera to project into.
        points: ``[..., 3]`` world coordinates.

    Returns:
        ``(uv, z)`` with ``uv`` of shape ``[..., 2]`` in continuous pixel
        coordinates and ``z`` the camera-space depth. Points with ``z <= 0``
        get non-finite or meaningless ``uv``; callers mask them by ``z``.
    """
    world = np.asarray(points, dtype=np.float64)
    cam_points = world @ cam.pose.rotation.T + cam.pose.translation
    z = cam_points[..., 2]
    safe_z = np.where(np.abs(z) > 1e-12, z, 1e-12)
    k = cam.intrinsics
    u = k.fx * cam_points[..., 0] / safe_z + k.cx
    v = k.fy * cam_points[..., 1] / safe_z + k.cy
    return np.stack([u, v], axis=-1), z


def pixel_rays(cam: CameraView) -> DoubleArray:
    """Camera-space rays through pixel centres, scaled to unit depth.

    Returns:
        ``[H, W, 3]`` array whose z component is 1.
    """
    k = cam.intrinsics
    xs = (np.arange(k.width, dtype=np.float64) + 0.5 - k.cx) / k.fx
    ys = (np.arange(k.height, dtype=np.float64) + 0.5 - k.cy) / k.fy
    grid_x, grid_y = np.meshgrid(xs, ys)
    return np.stack([grid_x, grid_y, np.ones_like(grid_x)], axis=-1)


def camera_to_world(cam: CameraView, cam_points: np.ndarray) -> DoubleArray:
    """Map ``[..., 3]`` camera-space points to world space."""
    return (np.asarray(cam_points, dtype=np.float64) - cam.pose.translation) @ cam.pose.rotation


def save_poses(cameras: list[CameraView], path: str | Path) -> None:
    """Write a scene's cameras as a JSON array."""
    records = [cam.to_dict() for cam in cameras]
    Path(path).write_text(json.dumps(records, indent=2), encoding="utf-8")


def load_poses(path: str | Path) -> list[CameraView]:
    """Read a scene's cameras from a JSON array.

    Raises:
        MissingPosesError: If the file does not exist.
    """
    path = Path(path)
    if not path.exists():
        raise MissingPosesError(f"Poses file not found: {path}")
    records = json.loads(path.read_text(encoding="utf-8"))
    cameras = [CameraView.from_dict(record) for record in records]
    logger.debug(f"Loaded {len(cameras)} cameras from {path}")
    return cameras
