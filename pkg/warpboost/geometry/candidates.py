"""Depth hypothesis grids for plane sweeping."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from warpboost.config.settings import DepthSpacing
from warpboost.core.errors import (
    EmptyRangeError,
    MissingBaseDepthError,
    ShapeMismatchError,
    TooFewCandidatesError,
)
from warpboost.tensorio.tensor import DoubleArray


class CandidateMode(str, Enum):
    """Whether candidate values are depths or offsets from a base depth."""

    ABSOLUTE = "absolute"
    RESIDUAL = "residual"


@dataclass(frozen=True, eq=False)
class DepthHypothesisGrid:
    """Depth candidates shared by every pixel (``[D]``) or per pixel (``[H, W, D]``).

    In residual mode the values are offsets symmetric about zero spanning
    ``range_width``; the depth tested at a pixel is ``base + offset``
    clamped to ``[near, far]``.
    """

    mode: CandidateMode
    values: DoubleArray
    near: float
    far: float
    range_width: float

    def __post_init__(self) -> None:
        if self.values.shape[-1] < 2:
            raise TooFewCandidatesError(f"a grid needs at least 2 candidates, got {self.values.shape[-1]}")

    @property
    def depth_count(self) -> int:
        """Number of candidates D."""
        return int(self.values.shape[-1])

    def depths(self, base_depth: np.ndarray | None = None) -> DoubleArray:
        """Absolute depths tested at each pixel.

        Returns:
            ``[D]`` or ``[H, W, D]`` for absolute grids, ``[H, W, D]`` for
            residual grids.

        Raises:
            MissingBaseDepthError: If a residual grid is used without a base.
        """
        if self.mode == CandidateMode.ABSOLUTE:
            return self.values
        if base_depth is None:
            raise MissingBaseDepthError("residual candidates need a base depth map")
        base = np.asarray(base_depth, dtype=np.float64)
        if self.values.ndim == 3 and self.values.shape[:2] != base.shape:
            raise ShapeMismatchError(
                f"base depth {base.shape} does not match grid {self.values.shape[:2]}"
            )
        return np.clip(base[..., None] + self.values, self.near, self.far)


def sample_depth_candidates(
    near: float,
    far: float,
    count: int,
    spacing: DepthSpacing = DepthSpacing.INVERSE_DEPTH,
) -> DepthHypothesisGrid:
    """Build an absolute grid spanning ``[near, far]``.

    Inverse-depth spacing places candidates uniformly in ``1/d``, which
    concentrates them near the camera.

    Raises:
        EmptyRangeError: If ``near <= 0`` or ``far <= near``.
    """
    if near <= 0:
        raise EmptyRangeError(f"near must be positive, got {near}")
    if far <= near:
        raise EmptyRangeError(f"empty depth range [{near}, {far}]")
    if count < 2:
        raise TooFewCandidatesError(f"a grid needs at least 2 candidates, got {count}")

    if spacing == DepthSpacing.LINEAR:
        values = np.linspace(near, far, count, dtype=np.float64)
    else:
        values = 1.0 / np.linspace(1.0 / near, 1.0 / far, count, dtype=np.float64)
    values[0], values[-1] = near, far

    return DepthHypothesisGrid(
        mode=CandidateMode.ABSOLUTE,
        values=values,
        near=near,
        far=far,
        range_width=far - near,
    )


def residual_candidates(range_width: float, count: int, near: float, far: float) -> DepthHypothesisGrid:
    """Build a residual grid of ``count`` offsets spanning ``[-range_width/2, range_width/2]``."""
    if range_width <= 0:
        raise EmptyRangeError(f"residual range must be positive, got {range_width}")
    if count < 2:
        raise TooFewCandidatesError(f"a grid needs at least 2 candidates, got {count}")

    half = range_width / 2.0
    offsets = np.linspace(-half, half, count, dtype=np.float64)
    # exact antisymmetry
    offsets = 0.5 * (offsets - offsets[::-1])

    return DepthHypothesisGrid(
        mode=CandidateMode.RESIDUAL,
        values=offsets,
        near=near,
        far=far,
        range_width=range_width,
    )


def candidate_spacing_at(grid: DepthHypothesisGrid, depth: np.ndarray) -> DoubleArray:
    """Gap between neighbouring candidates around each depth.

    Residual grids are evenly spaced. For absolute grids the gap of the
    interval containing the depth is used.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if grid.mode == CandidateMode.RESIDUAL or grid.values.ndim != 1:
        step = grid.range_width / (grid.depth_count - 1)
        return np.full(depth.shape, step, dtype=np.float64)

    gaps = np.diff(grid.values)
    interval = np.clip(np.searchsorted(grid.values, depth) - 1, 0, gaps.size - 1)
    return gaps[interval]
