"""Ray-cast synthetic scenes with analytic depth.

Scenes are built from axis-aligned rectangles. Each camera casts one ray
through every pixel centre, keeps the nearest hit and paints it with the
scene texture evaluated in that face's own coordinates.
"""

import logging
from dataclasses import dataclass

import numpy as np

from warpboost.core.errors import GeometryOutsideRangeError, UnknownViewError
from warpboost.geometry.camera import CameraView, Intrinsics, Pose, pixel_rays, project_points
from warpboost.geometry.depth import unproject_depth
from warpboost.scenes.models import SceneConfig, SceneKind
from warpboost.scenes.textures import texture_rgb
from warpboost.tensorio.tensor import BoolArray, DoubleArray, FloatArray

logger = logging.getLogger(__name__)

HIT_EPSILON = 1e-9
COVISIBLE_TOLERANCE = 0.02


@dataclass(frozen=True)
class Face:
    """Rectangle perpendicular to ``axis`` at ``offset``.

    ``lower``/``upper`` bound the other two world coordinates (the entry for
    ``axis`` itself is ignored); infinite bounds make unbounded planes.
    """

    axis: int
    offset: float
    lower: tuple[float, float, float]
    upper: tuple[float, float, float]

    @property
    def surface_axes(self) -> tuple[int, int]:
        a, b = [i for i in range(3) if i != self.axis]
        return a, b


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """Rendered views of a scene together with their cameras and true depths."""

    config: SceneConfig
    images: list[FloatArray]
    cameras: list[CameraView]
    gt_depth: list[FloatArray]

    @property
    def views(self) -> int:
        return len(self.images)

    def check_view(self, index: int) -> None:
        if not 0 <= index < self.views:
            raise UnknownViewError(f"view {index} not in scene with {self.views} views")


def scene_faces(cfg: SceneConfig) -> list[Face]:
    inf = float("inf")
    if cfg.kind == SceneKind.TEXTURED_PLANE:
        return [Face(2, cfg.plane_depth, (-inf, -inf, 0.0), (inf, inf, 0.0))]
    if cfg.kind == SceneKind.TWO_PLANES:
        return [
            Face(2, cfg.plane_depth, (-inf, -inf, 0.0), (cfg.edge_x, inf, 0.0)),
            Face(2, cfg.back_depth, (-inf, -inf, 0.0), (inf, inf, 0.0)),
        ]
    hw, hh, depth = cfg.room_half_width, cfg.room_half_height, cfg.room_depth
    return [
        Face(2, depth, (-hw, -hh, 0.0), (hw, hh, 0.0)),
        Face(0, -hw, (0.0, -hh, -inf), (0.0, hh, depth)),
        Face(0, hw, (0.0, -hh, -inf), (0.0, hh, depth)),
        Face(1, -hh, (-hw, 0.0, -inf), (hw, 0.0, depth)),
        Face(1, hh, (-hw, 0.0, -inf), (hw, 0.0, depth)),
    ]


def scene_cameras(cfg: SceneConfig) -> list[CameraView]:
    """Cameras on the x axis with identity rotation, centred on the origin."""
    size = cfg.image_size
    intrinsics = Intrinsics(fx=cfg.focal, fy=cfg.focal, cx=size / 2.0, cy=size / 2.0, width=size, height=size)
    cameras = []
    for i in range(cfg.views):
        centre = np.array([(i - (cfg.views - 1) / 2.0) * cfg.baseline, 0.0, 0.0])
        cameras.append(CameraView(intrinsics, Pose(np.eye(3), -centre)))
    return cameras


def cast_rays(
    cam: CameraView,
    faces: list[Face],
) -> tuple[DoubleArray, DoubleArray, DoubleArray, np.ndarray]:
    """Intersect every pixel ray with the faces.

    Returns:
        ``(depth, u, v, face_index)`` per pixel; pixels that hit nothing get
        infinite depth and face index -1.
    """
    rays = pixel_rays(cam)
    # world directions; a ray parameter t equals the camera z-depth
    directions = rays @ cam.pose.rotation
    origin = cam.pose.center

    shape = rays.shape[:2]
    depth = np.full(shape, np.inf)
    u = np.zeros(shape)
    v = np.zeros(shape)
    face_index = np.full(shape, -1, dtype=np.int64)

    for index, face in enumerate(faces):
        component = directions[..., face.axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (face.offset - origin[face.axis]) / component
            hit = origin + t[..., None] * directions
        inside = np.isfinite(t) & (t > HIT_EPSILON)
        for axis in face.surface_axes:
            inside &= (hit[..., axis] >= face.lower[axis]) & (hit[..., axis] <= face.upper[axis])
        closer = inside & (t < depth)

        a, b = face.surface_axes
        depth = np.where(closer, t, depth)
        u = np.where(closer, hit[..., a], u)
        v = np.where(closer, hit[..., b], v)
        face_index = np.where(closer, index, face_index)
    return depth, u, v, face_index


def _shade(cfg: SceneConfig, u: DoubleArray, v: DoubleArray, face_index: np.ndarray) -> DoubleArray:
    period = cfg.texture_period
    # shift each face's pattern so adjacent faces do not line up
    shift = face_index.astype(np.float64) * 0.37 * period
    return texture_rgb(cfg.texture, u + shift, v - shift, period, cfg.texture_seed)


def generate_scene(cfg: SceneConfig) -> SyntheticScene:
    """Render every camera of a scene by exact ray casting.

    Raises:
        GeometryOutsideRangeError: If any pixel misses the geometry or sees
            it outside ``[near, far]``.
    """
    faces = scene_faces(cfg)
    cameras = scene_cameras(cfg)
    images: list[FloatArray] = []
    depths: list[FloatArray] = []

    for i, cam in enumerate(cameras):
        depth, u, v, face_index = cast_rays(cam, faces)
        if np.any(face_index < 0):
            raise GeometryOutsideRangeError(f"view {i}: {int(np.sum(face_index < 0))} pixels miss the scene")
        low, high = float(depth.min()), float(depth.max())
        if low < cfg.near or high > cfg.far:
            raise GeometryOutsideRangeError(
                f"view {i}: depth range [{low:.4f}, {high:.4f}] outside [{cfg.near}, {cfg.far}]"
            )
        images.append(_shade(cfg, u, v, face_index).astype(np.float32))
        depths.append(depth.astype(np.float32))

    logger.info(f"Generated {cfg.kind.value} scene: {cfg.views} views at {cfg.image_size}px")
    return SyntheticScene(config=cfg, images=images, cameras=cameras, gt_depth=depths)


def covisibility_mask(scene: SyntheticScene, i: int, j: int) -> BoolArray:
    """Pixels of view ``i`` whose surface point is also seen by view ``j``.

    A point counts as seen when it projects inside view ``j`` and its depth
    there matches view ``j``'s depth at the nearest pixel.
    """
    scene.check_view(i)
    scene.check_view(j)
    depth_i = scene.gt_depth[i].astype(np.float64)
    world = unproject_depth(depth_i, scene.cameras[i])
    uv, z = project_points(scene.cameras[j], world)

    height, width = scene.gt_depth[j].shape
    col = np.floor(uv[..., 0]).astype(np.int64)
    row = np.floor(uv[..., 1]).astype(np.int64)
    inside = (z > 0) & (col >= 0) & (col < width) & (row >= 0) & (row < height)

    seen = np.zeros(depth_i.shape, dtype=bool)
    target = scene.gt_depth[j].astype(np.float64)[row[inside], col[inside]]
    seen[inside] = np.abs(z[inside] - target) <= COVISIBLE_TOLERANCE * z[inside]
    return seen


def covisible_with_any(scene: SyntheticScene, i: int) -> BoolArray:
    """Pixels of view ``i`` seen by at least one other view."""
    mask = np.zeros(scene.gt_depth[i].shape, dtype=bool)
    for j in range(scene.views):
        if j != i:
            mask |= covisibility_mask(scene, i, j)
    return mask
