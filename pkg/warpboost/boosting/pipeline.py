"""Iterative depth estimation.

Each unit works at a larger resolution than the last. The first unit
sweeps absolute candidates over the full depth range; every later unit
sweeps residual offsets around the upsampled previous depth, over half the
previous range.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from warpboost.boosting.dpbu import BoostState, run_dpbu, update_depth
from warpboost.config.settings import FeatureProviderConfig, PipelineConfig
from warpboost.core.errors import (
    EmptyTraceError,
    NotEnoughViewsError,
    PipelineConfigError,
    SearchRangeError,
    ShapeMismatchError,
)
from warpboost.core.timing import StageTimer
from warpboost.epipolar.memory import ByteCounter
from warpboost.geometry.camera import CameraView
from warpboost.geometry.candidates import (
    DepthHypothesisGrid,
    residual_candidates,
    sample_depth_candidates,
)
from warpboost.geometry.depth import resize_depth
from warpboost.tensorio.features import FeatureProvider, area_downsample
from warpboost.tensorio.tensor import DoubleArray, FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnitTrace:
    """What one unit produced for one target view."""

    unit: int
    resolution: tuple[int, int]
    depth: FloatArray
    residual: DoubleArray
    probs: DoubleArray
    range_width: float
    grid: DepthHypothesisGrid


@dataclass
class IterationTrace:
    """Per-unit results for one target view."""

    view_index: int
    near: float
    far: float
    units: list[UnitTrace] = field(default_factory=list)

    @property
    def final_depth(self) -> FloatArray:
        """Depth map of the last unit."""
        if not self.units:
            raise EmptyTraceError("trace has no units")
        return self.units[-1].depth


def next_search_range(trace: IterationTrace, unit: int, count: int) -> DepthHypothesisGrid:
    """Residual candidates for ``unit`` over half the previous unit's range.

    Args:
        trace: Trace holding at least ``unit`` finished units.
        unit: 0-based index of the unit about to run (at least 1).
        count: Number of candidates.

    Raises:
        SearchRangeError: If ``unit`` is 0 or the previous unit has not run.
    """
    if unit < 1:
        raise SearchRangeError("the first unit uses absolute candidates")
    if len(trace.units) < unit:
        raise SearchRangeError(f"trace has {len(trace.units)} units, unit {unit} needs {unit}")
    width = trace.units[unit - 1].range_width / 2.0
    return residual_candidates(width, count, trace.near, trace.far)


@dataclass
class PipelineHooks:
    """Container for pipeline event callbacks.

    All callbacks are optional. Unset callbacks are no-ops.
    """

    on_run_start: Callable[[int], None] | None = None
    on_view_start: Callable[[int], None] | None = None
    on_unit_start: Callable[[int, int, DepthHypothesisGrid], None] | None = None
    on_layer_end: Callable[[int, int, BoostState], None] | None = None
    on_unit_end: Callable[[int, UnitTrace], None] | None = None
    on_view_end: Callable[[IterationTrace], None] | None = None
    on_run_end: Callable[[list[IterationTrace]], None] | None = None


class IterativeDepthEstimator:
    """Runs the unit schedule for every view of a scene.

    Features are computed once per (view, scale) and shared between target
    views.
    """

    def __init__(
        self,
        cfg: PipelineConfig,
        features: FeatureProvider | None = None,
        hooks: PipelineHooks | None = None,
        timer: StageTimer | None = None,
        counter: ByteCounter | None = None,
    ) -> None:
        """Initialize the estimator.

        Args:
            cfg: Pipeline configuration; ``near`` and ``far`` must be set.
            features: Feature provider (pyramid features by default).
            hooks: Event callbacks.
            timer: Stage timer shared with the caller.
            counter: Byte counter for correlation buffers.
        """
        if cfg.near is None or cfg.far is None:
            raise PipelineConfigError("depth range is unset; use PipelineConfig.with_range")
        self.cfg = cfg
        self.near: float = cfg.near
        self.far: float = cfg.far
        self.features = features or FeatureProvider()
        self.hooks = hooks or PipelineHooks()
        self.timer = timer or StageTimer()
        self.counter = counter or ByteCounter()

    def run(self, images: list[FloatArray], cameras: list[CameraView]) -> list[IterationTrace]:
        """Estimate depth for every view, using all other views as sources."""
        self._check_inputs(images, cameras)
        logger.info(
            f"Iterative depth over {len(images)} views: units={self.cfg.units}, "
            f"layers={self.cfg.layers_per_unit}, resolutions={self.cfg.resolutions}"
        )
        self._call_hook("on_run_start", len(images))

        traces = [self.estimate_view(images, cameras, i) for i in range(len(images))]

        self._call_hook("on_run_end", traces)
        return traces

    def estimate_view(
        self,
        images: list[FloatArray],
        cameras: list[CameraView],
        target: int,
    ) -> IterationTrace:
        """Run all units for one target view."""
        self._check_inputs(images, cameras)
        self._call_hook("on_view_start", target)

        trace = IterationTrace(view_index=target, near=self.near, far=self.far)
        image_h, image_w = images[target].shape[:2]
        depth: FloatArray | None = None

        for unit in range(self.cfg.units):
            factor = self._unit_factor(image_h, image_w, self.cfg.resolutions[unit])
            unit_shape = (image_h // factor, image_w // factor)
            feature_scale = factor * self.cfg.feature_downsample

            if unit == 0:
                grid = sample_depth_candidates(
                    self.near, self.far, self.cfg.candidates_per_unit[0], self.cfg.spacing
                )
                previous = np.zeros(unit_shape, dtype=np.float32)
                base = None
            else:
                assert depth is not None
                grid = next_search_range(trace, unit, self.cfg.candidates_per_unit[unit])
                previous = resize_depth(depth, *unit_shape)
                base = previous
                if self.cfg.feature_downsample > 1:
                    base = area_downsample(previous, self.cfg.feature_downsample)

            self._call_hook("on_unit_start", target, unit, grid)

            with self.timer.stage("features"):
                feats = [
                    self.features.features(i, image, feature_scale)
                    for i, image in enumerate(images)
                ]
            feature_cams = [cam.rescaled(feature_scale) for cam in cameras]
            sources = [(feats[i], feature_cams[i]) for i in range(len(images)) if i != target]

            probs, delta = run_dpbu(
                feats[target],
                sources,
                feature_cams[target],
                grid,
                unit_shape,
                self.cfg,
                base_depth=base,
                counter=self.counter,
                timer=self.timer,
                on_layer=lambda state, u=unit: self._call_hook("on_layer_end", target, u, state),
            )
            depth = update_depth(previous, delta, self.near, self.far)

            unit_trace = UnitTrace(
                unit=unit,
                resolution=unit_shape,
                depth=depth,
                residual=delta,
                probs=probs,
                range_width=grid.range_width,
                grid=grid,
            )
            trace.units.append(unit_trace)
            logger.info(
                f"View {target} unit {unit + 1}/{self.cfg.units} at "
                f"{unit_shape[1]}x{unit_shape[0]}, D={grid.depth_count}, "
                f"range={grid.range_width:.4g}"
            )
            self._call_hook("on_unit_end", target, unit_trace)

        self._call_hook("on_view_end", trace)
        return trace

    def _check_inputs(self, images: list[FloatArray], cameras: list[CameraView]) -> None:
        if len(images) < 2:
            raise NotEnoughViewsError(f"need at least 2 views, got {len(images)}")
        if len(images) != len(cameras):
            raise ShapeMismatchError(f"{len(images)} images but {len(cameras)} cameras")

    def _unit_factor(self, image_h: int, image_w: int, resolution: int) -> int:
        """Integer factor between the image and a unit resolution."""
        if resolution > image_h or image_h % resolution:
            raise PipelineConfigError(
                f"unit resolution {resolution} does not divide image height {image_h}"
            )
        factor = image_h // resolution
        if image_w % factor:
            raise PipelineConfigError(
                f"unit resolution {resolution} gives a fractional width for {image_w}"
            )
        return factor

    def _call_hook(self, hook_name: str, *args: Any) -> None:
        """Safely call a hook if it's defined.

        Args:
            hook_name: Name of the hook to call.
            *args: Arguments to pass to the hook.
        """
        hook = getattr(self.hooks, hook_name, None)
        if hook is not None:
            try:
                hook(*args)
            except Exception as e:
                logger.warning(f"Hook {hook_name} raised exception: {e}")


def run_iterative_depth(
    images: list[FloatArray],
    cameras: list[CameraView],
    cfg: PipelineConfig,
    feature_cfg: FeatureProviderConfig | None = None,
    hooks: PipelineHooks | None = None,
    timer: StageTimer | None = None,
    counter: ByteCounter | None = None,
) -> list[IterationTrace]:
    """Estimate depth for every view of a scene; one trace per view.

    Raises:
        NotEnoughViewsError: If fewer than two views are given.
    """
    estimator = IterativeDepthEstimator(
        cfg,
        features=FeatureProvider(feature_cfg),
        hooks=hooks,
        timer=timer,
        counter=counter,
    )
    return estimator.run(images, cameras)


class LoggingHooks(PipelineHooks):
    """Pre-configured hooks that log all events."""

    def __init__(self, log_level: int = logging.INFO) -> None:
        """Initialize logging hooks.

        Args:
            log_level: Logging level to use.
        """
        self._logger = logging.getLogger(f"{__name__}.hooks")
        self._level = log_level

        super().__init__(
            on_run_start=self._on_run_start,
            on_view_start=self._on_view_start,
            on_unit_start=self._on_unit_start,
            on_layer_end=self._on_layer_end,
            on_unit_end=self._on_unit_end,
            on_view_end=self._on_view_end,
            on_run_end=self._on_run_end,
        )

    def _on_run_start(self, views: int) -> None:
        self._logger.log(self._level, f"Run started over {views} views")

    def _on_view_start(self, view: int) -> None:
        self._logger.log(self._level, f"View {view} started")

    def _on_unit_start(self, view: int, unit: int, grid: DepthHypothesisGrid) -> None:
        self._logger.log(
            self._level,
            f"View {view} unit {unit + 1}: {grid.mode.value} candidates, "
            f"D={grid.depth_count}, range={grid.range_width:.4g}",
        )

    def _on_layer_end(self, view: int, unit: int, state: BoostState) -> None:
        peak = float(state.probs.max(axis=-1).mean())
        self._logger.log(
            self._level,
            f"View {view} unit {unit + 1} layer {state.layer_index}: mean peak {peak:.4f}",
        )

    def _on_unit_end(self, view: int, unit: UnitTrace) -> None:
        self._logger.log(
            self._level,
            f"View {view} unit {unit.unit + 1} ended: depth "
            f"[{float(unit.depth.min()):.4g}, {float(unit.depth.max()):.4g}]",
        )

    def _on_view_end(self, trace: IterationTrace) -> None:
        self._logger.log(self._level, f"View {trace.view_index} ended after {len(trace.units)} units")

    def _on_run_end(self, traces: list[IterationTrace]) -> None:
        self._logger.log(self._level, f"Run ended: {len(traces)} views")


class CountingHooks(PipelineHooks):
    """Hooks that count events for testing."""

    def __init__(self) -> None:
        """Initialize counting hooks."""
        self.run_start_count = 0
        self.view_start_count = 0
        self.unit_start_count = 0
        self.layer_end_count = 0
        self.unit_end_count = 0
        self.view_end_count = 0
        self.run_end_count = 0

        super().__init__(
            on_run_start=lambda _: self._inc("run_start_count"),
            on_view_start=lambda _: self._inc("view_start_count"),
            on_unit_start=lambda *_: self._inc("unit_start_count"),
            on_layer_end=lambda *_: self._inc("layer_end_count"),
            on_unit_end=lambda *_: self._inc("unit_end_count"),
            on_view_end=lambda _: self._inc("view_end_count"),
            on_run_end=lambda _: self._inc("run_end_count"),
        )

    def _inc(self, attr: str) -> None:
        setattr(self, attr, getattr(self, attr) + 1)
