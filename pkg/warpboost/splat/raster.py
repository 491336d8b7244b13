"""Front-to-back splat rasterization on the CPU.

Splats are ordered by view depth (ties by index). Each splat touches the
pixels whose centres fall inside its 3-sigma box; every (pixel, splat)
contribution is collected, sorted by pixel and order, and composited
with ``C = sum_i w_i c_i T_i`` and ``T_i = prod_{j<i} (1 - w_j)``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from warpboost.geometry.camera import CameraView
from warpboost.splat.gaussians import GaussianSet
from warpboost.tensorio.tensor import AnyArray, DoubleArray, FloatArray

logger = logging.getLogger(__name__)

ANTIALIAS = 0.3
NEAR_EPSILON = 1e-6
SIGMA_EXTENT = 3.0


@dataclass(frozen=True, eq=False)
class ScreenGaussians:
    """Splats in front of a camera, projected to screen space.

    Attributes:
        ids: Index of each splat in the source set.
        means: ``[M, 2]`` continuous pixel coordinates.
        covariances: ``[M, 2, 2]`` screen covariances in square pixels.
        depths: ``[M]`` view depths.
    """

    ids: AnyArray
    means: DoubleArray
    covariances: DoubleArray
    depths: DoubleArray

    def __len__(self) -> int:
        return int(self.ids.shape[0])


@dataclass(frozen=True, eq=False)
class RenderedImage:
    """Composited colour and coverage."""

    color: FloatArray
    alpha: FloatArray


def project_covariance(
    gaussians: GaussianSet,
    cam: CameraView,
    antialias: float = ANTIALIAS,
) -> ScreenGaussians:
    """Project splats to screen space.

    ``cov2d = J W cov W^T J^T + antialias * I`` with ``J`` the perspective
    Jacobian at the mean and ``W`` the camera rotation. Splats at or behind
    the camera are dropped.
    """
    if len(gaussians) == 0:
        return ScreenGaussians(np.zeros(0, dtype=np.int64), np.zeros((0, 2)), np.zeros((0, 2, 2)), np.zeros(0))

    rot = cam.pose.rotation
    cam_points = gaussians.means @ rot.T + cam.pose.translation
    z = cam_points[:, 2]
    keep = np.flatnonzero(z > NEAR_EPSILON)
    cam_points, z = cam_points[keep], z[keep]

    k = cam.intrinsics
    x, y = cam_points[:, 0], cam_points[:, 1]
    means = np.stack([k.fx * x / z + k.cx, k.fy * y / z + k.cy], axis=1)

    jacobian = np.zeros((keep.size, 2, 3))
    jacobian[:, 0, 0] = k.fx / z
    jacobian[:, 0, 2] = -k.fx * x / z**2
    jacobian[:, 1, 1] = k.fy / z
    jacobian[:, 1, 2] = -k.fy * y / z**2

    world_cov = gaussians.covariances()[keep]
    view_cov = rot @ world_cov @ rot.T
    screen = jacobian @ view_cov @ jacobian.transpose(0, 2, 1)
    screen = 0.5 * (screen + screen.transpose(0, 2, 1)) + antialias * np.eye(2)

    return ScreenGaussians(ids=keep, means=means, covariances=screen, depths=z)


def _collect(
    screen: ScreenGaussians,
    opacities: DoubleArray,
    height: int,
    width: int,
) -> tuple[AnyArray, AnyArray, DoubleArray]:
    """Every non-zero (pixel, rank, weight) contribution, rank = draw order."""
    cov = screen.covariances
    det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] ** 2
    inv_xx = cov[:, 1, 1] / det
    inv_yy = cov[:, 0, 0] / det
    inv_xy = -cov[:, 0, 1] / det
    extent_x = SIGMA_EXTENT * np.sqrt(cov[:, 0, 0])
    extent_y = SIGMA_EXTENT * np.sqrt(cov[:, 1, 1])

    # grid coordinate of the mean; pixel centres sit at integers
    grid_x = screen.means[:, 0] - 0.5
    grid_y = screen.means[:, 1] - 0.5
    base_x = np.floor(grid_x)
    base_y = np.floor(grid_y)

    # footprint boxes clipped to the image
    lo_x = np.clip(base_x - np.floor(extent_x), 0, width).astype(np.int64)
    hi_x = np.clip(base_x + np.floor(extent_x) + 1, -1, width - 1).astype(np.int64)
    lo_y = np.clip(base_y - np.floor(extent_y), 0, height).astype(np.int64)
    hi_y = np.clip(base_y + np.floor(extent_y) + 1, -1, height - 1).astype(np.int64)
    span_x = np.maximum(hi_x - lo_x + 1, 0)
    span_y = np.maximum(hi_y - lo_y + 1, 0)
    on_screen = (span_x > 0) & (span_y > 0)

    pixels: list[AnyArray] = []
    ranks: list[AnyArray] = []
    weights: list[DoubleArray] = []
    boxes = np.stack([span_x[on_screen], span_y[on_screen]], axis=1)
    for sx, sy in np.unique(boxes, axis=0):
        members = np.flatnonzero(on_screen & (span_x == sx) & (span_y == sy))
        off_y, off_x = np.meshgrid(np.arange(sy), np.arange(sx), indexing="ij")
        off_x, off_y = off_x.reshape(-1), off_y.reshape(-1)

        px = lo_x[members, None] + off_x[None, :]
        py = lo_y[members, None] + off_y[None, :]
        dx = px - grid_x[members, None]
        dy = py - grid_y[members, None]

        power = -0.5 * (
            inv_xx[members, None] * dx * dx
            + 2.0 * inv_xy[members, None] * dx * dy
            + inv_yy[members, None] * dy * dy
        )
        weight = opacities[members, None] * np.exp(power)
        inside = (
            (np.abs(dx) <= extent_x[members, None])
            & (np.abs(dy) <= extent_y[members, None])
            & (weight > 0)
        )
        pixels.append((py * width + px)[inside])
        ranks.append(np.broadcast_to(members[:, None], px.shape)[inside])
        weights.append(weight[inside])

    if not pixels:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(pixels), np.concatenate(ranks), np.concatenate(weights)


def rasterize(
    gaussians: GaussianSet,
    cam: CameraView,
    height: int,
    width: int,
    antialias: float = ANTIALIAS,
) -> RenderedImage:
    """Render a set of splats into an ``height``×``width`` image over black."""
    color = np.zeros((height * width, 3), dtype=np.float64)
    transmittance = np.ones(height * width, dtype=np.float64)

    screen = project_covariance(gaussians, cam, antialias)
    pixel = np.zeros(0, dtype=np.int64)
    if len(screen):
        order = np.lexsort((screen.ids, screen.depths))
        ordered = ScreenGaussians(
            ids=screen.ids[order],
            means=screen.means[order],
            covariances=screen.covariances[order],
            depths=screen.depths[order],
        )
        opacities = gaussians.opacities[ordered.ids]
        colors = gaussians.colors[ordered.ids]

        pixel, rank, weight = _collect(ordered, opacities, height, width)
        sort = np.lexsort((rank, pixel))
        pixel, rank, weight = pixel[sort], rank[sort], weight[sort]

    if pixel.size:
        # position of each entry within its pixel's list
        first = np.r_[True, pixel[1:] != pixel[:-1]]
        starts = np.flatnonzero(first)
        group = np.cumsum(first) - 1
        position = np.arange(pixel.size) - starts[group]
        layers = int(position.max()) + 1

        for step in range(layers):
            sel = position == step
            pix = pixel[sel]
            contrib = weight[sel] * transmittance[pix]
            color[pix] += contrib[:, None] * colors[rank[sel]]
            transmittance[pix] *= 1.0 - weight[sel]

        logger.debug(
            f"Rasterized {len(screen)} splats, {pixel.size} contributions, "
            f"max depth complexity {layers}"
        )

    return RenderedImage(
        color=color.reshape(height, width, 3).astype(np.float32),
        alpha=(1.0 - transmittance).reshape(height, width).astype(np.float32),
    )
