"""The render job: splat the source views and score rendered targets."""

import logging
from pathlib import Path

import numpy as np

from warpboost.config.settings import Settings
from warpboost.core.errors import MissingDepthError
from warpboost.core.models import DepthSource, PropertyCheck, RenderReport, ViewMetrics
from warpboost.core.timing import StageTimer
from warpboost.jobs.depth import PREDICTED_DIR, full_resolution_depth, predicted_depth_path
from warpboost.scenes.generator import SyntheticScene
from warpboost.scenes.io import import_scene
from warpboost.splat.gaussians import GaussianSet, decode_gaussians, initial_raw_parameters
from warpboost.splat.metrics import psnr, ssim
from warpboost.splat.raster import rasterize
from warpboost.tensorio.images import write_png
from warpboost.tensorio.pfm import read_pfm
from warpboost.tensorio.tensor import FloatArray

logger = logging.getLogger(__name__)

RENDER_DIR = "renders"


def default_targets(views: int) -> list[int]:
    """The middle view, held out from the splats."""
    return [views // 2]


def source_depth(
    scene: SyntheticScene,
    view: int,
    source: DepthSource,
    predicted_dir: Path,
) -> FloatArray:
    """Depth used to place a view's splats.

    Raises:
        MissingDepthError: If predicted depth was requested but not dumped.
    """
    if source == DepthSource.GT:
        return scene.gt_depth[view]
    path = predicted_depth_path(predicted_dir, view)
    if not path.exists():
        raise MissingDepthError(f"No predicted depth for view {view} at {path}; run 'warpboost depth' first")
    height, width = scene.gt_depth[view].shape
    return full_resolution_depth(read_pfm(path), height, width)


def build_gaussians(
    scene: SyntheticScene,
    views: list[int],
    settings: Settings,
    source: DepthSource,
    predicted_dir: Path,
) -> GaussianSet:
    """One splat per pixel of each listed view, concatenated in view order."""
    sets = []
    for view in views:
        depth = source_depth(scene, view, source, predicted_dir)
        cam = scene.cameras[view]
        raw = initial_raw_parameters(depth, cam, settings.splat)
        sets.append(decode_gaussians(raw, depth, cam, scene.images[view], settings.splat))
    return GaussianSet.concat(sets)


def run_render_job(
    scene_dir: str | Path,
    settings: Settings,
    depth_source: DepthSource = DepthSource.GT,
    targets: list[int] | None = None,
    include_targets: bool = False,
    predicted_dir: str | Path | None = None,
    output_dir: str | Path | None = None,
    scene: SyntheticScene | None = None,
) -> RenderReport:
    """Render target views from the splats of the other views.

    Args:
        scene_dir: Scene directory written by ``export_scene``.
        settings: Resolved settings (the ``splat`` section is used).
        depth_source: Ground-truth or predicted depth for splat placement.
        targets: Views to render; the middle view by default.
        include_targets: Let target views contribute splats as well.
        predicted_dir: Where the depth job wrote its maps.
        output_dir: Where rendered PNGs go (``<scene_dir>/renders`` by default).
        scene: Already loaded scene, to skip reading ``scene_dir``.

    Raises:
        UnknownViewError: If a target is not a view of the scene.
        MissingDepthError: If predicted depth is missing for a source view.
    """
    scene_dir = Path(scene_dir)
    scene = scene or import_scene(scene_dir)
    targets = targets if targets is not None else default_targets(scene.views)
    for target in targets:
        scene.check_view(target)

    sources = [v for v in range(scene.views) if include_targets or v not in targets]
    predicted = Path(predicted_dir) if predicted_dir else scene_dir / PREDICTED_DIR
    out = Path(output_dir) if output_dir else scene_dir / RENDER_DIR
    out.mkdir(parents=True, exist_ok=True)

    timer = StageTimer()
    with timer.stage("splat"):
        gaussians = build_gaussians(scene, sources, settings, depth_source, predicted)

    metrics = []
    finite = True
    for target in targets:
        height, width = scene.gt_depth[target].shape
        with timer.stage("render"):
            rendered = rasterize(gaussians, scene.cameras[target], height, width, settings.splat.antialias)
        finite &= bool(np.all(np.isfinite(rendered.color)))
        write_png(rendered.color, out / f"view_{target:02d}_{depth_source.value}.png")
        metrics.append(
            ViewMetrics(
                view=target,
                psnr=round(psnr(rendered.color, scene.images[target]), 6),
                ssim=round(ssim(rendered.color, scene.images[target]), 6),
                held_out=target not in sources,
            )
        )
        logger.info(f"Rendered view {target}: PSNR {metrics[-1].psnr:.2f} dB")

    return RenderReport(
        scene=str(scene_dir),
        depth_source=depth_source,
        splats=len(gaussians),
        targets=metrics,
        config=settings.model_dump(mode="json"),
        checks=[PropertyCheck(name="finite_render", passed=finite, detail="all rendered values finite")],
        timings=timer.as_dict() if settings.output.include_timings else None,
    )
