"""The depth job: iterative depth for every view of a scene, scored against ground truth."""

import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np

from warpboost.boosting.pipeline import (
    IterationTrace,
    IterativeDepthEstimator,
    PipelineHooks,
    UnitTrace,
)
from warpboost.config.settings import Settings
from warpboost.core.models import PropertyCheck, RunReport, UnitErrorStats, ViewDepthReport
from warpboost.core.timing import StageTimer
from warpboost.epipolar.memory import ByteCounter
from warpboost.geometry.candidates import CandidateMode, candidate_spacing_at
from warpboost.geometry.depth import resize_depth
from warpboost.scenes.generator import SyntheticScene, covisible_with_any
from warpboost.scenes.io import import_scene
from warpboost.tensorio.features import FeatureProvider
from warpboost.tensorio.pfm import write_pfm
from warpboost.tensorio.tensor import BoolArray, FloatArray

logger = logging.getLogger(__name__)

PREDICTED_DIR = "predicted"
ROW_SUM_TOLERANCE = 1e-6


def predicted_depth_path(directory: Path, view: int, unit: int | None = None) -> Path:
    """Where the depth job writes a view's final (or per-unit) depth map."""
    if unit is None:
        return directory / f"view_{view:02d}.pfm"
    return directory / f"view_{view:02d}_unit{unit + 1}.pfm"


def full_resolution_depth(depth: FloatArray, height: int, width: int) -> FloatArray:
    """Bring a unit's depth map up to image size for comparison."""
    if depth.shape == (height, width):
        return depth.astype(np.float32)
    return resize_depth(depth, height, width)


def unit_error_stats(unit: UnitTrace, gt_depth: FloatArray, mask: BoolArray) -> UnitErrorStats:
    """Compare one unit's depth with ground truth over the masked pixels."""
    height, width = gt_depth.shape
    depth = full_resolution_depth(unit.depth, height, width).astype(np.float64)
    gt = gt_depth.astype(np.float64)

    error = np.abs(depth - gt)[mask]
    relative = error / gt[mask]
    spacing = candidate_spacing_at(unit.grid, gt)[mask]
    pixels = int(mask.sum())

    return UnitErrorStats(
        unit=unit.unit + 1,
        resolution=unit.resolution[0],
        candidates=unit.grid.depth_count,
        range_width=unit.range_width if unit.grid.mode == CandidateMode.RESIDUAL else None,
        mean_abs=float(error.mean()) if pixels else 0.0,
        mean_abs_rel=float(relative.mean()) if pixels else 0.0,
        within_half_spacing=float(np.mean(error <= 0.5 * spacing)) if pixels else 0.0,
        pixels=pixels,
    )


def _depth_checks(traces: list[IterationTrace]) -> list[PropertyCheck]:
    in_range = all(
        bool(np.all(np.isfinite(u.depth)) and u.depth.min() >= t.near and u.depth.max() <= t.far)
        for t in traces
        for u in t.units
    )
    row_error = max(
        float(np.abs(u.probs.sum(axis=-1) - 1.0).max()) for t in traces for u in t.units
    )
    return [
        PropertyCheck(
            name="depth_in_range",
            passed=in_range,
            detail="every unit depth finite and inside [near, far]",
        ),
        PropertyCheck(
            name="row_sums",
            passed=row_error <= ROW_SUM_TOLERANCE,
            detail=f"max |sum(P) - 1| = {row_error:.3e}",
        ),
    ]


def dump_traces(traces: list[IterationTrace], directory: Path, height: int, width: int) -> None:
    """Write per-unit PFMs and a full-resolution final depth per view."""
    directory.mkdir(parents=True, exist_ok=True)
    for trace in traces:
        for unit in trace.units:
            write_pfm(unit.depth, predicted_depth_path(directory, trace.view_index, unit.unit))
        final = full_resolution_depth(trace.final_depth, height, width)
        write_pfm(final, predicted_depth_path(directory, trace.view_index))
    logger.info(f"Wrote depth maps for {len(traces)} views to {directory}")


def run_depth_job(
    scene_dir: str | Path,
    settings: Settings,
    output_dir: str | Path | None = None,
    scene: SyntheticScene | None = None,
    on_view_end: Callable[[IterationTrace], None] | None = None,
) -> RunReport:
    """Estimate depth for every view of a scene and score each unit.

    Args:
        scene_dir: Scene directory written by ``export_scene``.
        settings: Resolved settings; the pipeline's unset depth range is
            taken from the scene.
        output_dir: Where PFM dumps go (``<scene_dir>/predicted`` by default).
        scene: Already loaded scene, to skip reading ``scene_dir``.
        on_view_end: Called after each view, e.g. to advance a progress bar.

    Raises:
        MissingPosesError: If the scene has no poses file.
        MissingSceneFileError: If another scene file is missing.
        PipelineConfigError: If the unit resolutions do not fit the images.
    """
    scene_dir = Path(scene_dir)
    scene = scene or import_scene(scene_dir)
    pipeline = settings.pipeline.with_range(scene.config.near, scene.config.far)
    resolved = settings.merge_with({"pipeline": pipeline.model_dump(mode="json")})

    timer = StageTimer()
    counter = ByteCounter()
    estimator = IterativeDepthEstimator(
        pipeline,
        features=FeatureProvider(settings.features),
        hooks=PipelineHooks(on_view_end=on_view_end),
        timer=timer,
        counter=counter,
    )
    traces = estimator.run(scene.images, scene.cameras)

    views = []
    for trace in traces:
        mask = covisible_with_any(scene, trace.view_index)
        gt = scene.gt_depth[trace.view_index]
        views.append(
            ViewDepthReport(
                view=trace.view_index,
                units=[unit_error_stats(u, gt, mask) for u in trace.units],
            )
        )

    if settings.output.dump_pfm:
        height, width = scene.gt_depth[0].shape
        dump_traces(traces, Path(output_dir) if output_dir else scene_dir / PREDICTED_DIR, height, width)

    report = RunReport(
        scene=str(scene_dir),
        views=views,
        peak_correlation_bytes=counter.peak,
        config=resolved.model_dump(mode="json"),
        checks=_depth_checks(traces),
        timings=timer.as_dict() if settings.output.include_timings else None,
    )
    logger.info(
        f"Depth job on {scene_dir}: {len(views)} views, "
        f"mean final error {report.mean_final_error():.4f}"
    )
    return report

