"""Command-line interface for WarpBoost.

This module provides the main CLI entry point, with commands for depth
estimation, splat rendering, the correlation benchmark, the attention
property suite and synthetic scene generation.
"""

import logging
import sys
from pathlib import Path
from typing import Any, NoReturn

import click
import yaml
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text

from warpboost import __version__
from warpboost.config.settings import GfmConfig, ReportFormat, load_settings
from warpboost.core.errors import InvalidSceneFileError, WarpboostError
from warpboost.core.models import BenchReport, DepthSource, JobReport, RunReport
from warpboost.jobs.bench import DEFAULT_MIN_RATIO, run_bench
from warpboost.jobs.depth import run_depth_job
from warpboost.jobs.gfm_check import run_gfm_check
from warpboost.jobs.render import run_render_job
from warpboost.output import ReportGenerator
from warpboost.scenes.generator import generate_scene
from warpboost.scenes.io import export_scene
from warpboost.scenes.models import PRESETS, SceneConfig, SceneKind, TextureKind, preset_config

console = Console()
error_console = Console(stderr=True)

# Exit codes
EXIT_SUCCESS = 0
EXIT_FAILURE = 1

HANDLED_ERRORS = (WarpboostError, ValueError, OSError, KeyError)


def print_banner() -> None:
    """Print the WarpBoost banner."""
    banner = Text()
    banner.append("WarpBoost", style="bold cyan")
    banner.append(" v" + __version__, style="dim")
    banner.append("\n")
    banner.append("Iterative multi-view depth and Gaussian splat rendering", style="italic")

    console.print(Panel(banner, border_style="cyan", padding=(0, 2)))


def configure_logging(verbose: bool) -> None:
    """Route library logging through rich; DEBUG when verbose, WARNING otherwise."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=error_console, show_path=False)],
        force=True,
    )


def parse_int_list(value: str | None, name: str) -> list[int] | None:
    """Parse a comma-separated list of integers, e.g. '64,128,256'."""
    if value is None:
        return None
    try:
        items = [int(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'", param_hint=name) from e
    if not items:
        raise click.BadParameter("list is empty", param_hint=name)
    return items


def drop_none(data: dict[str, Any]) -> dict[str, Any]:
    """Remove unset CLI values, recursing into sections."""
    cleaned: dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = drop_none(value)
            if value:
                cleaned[key] = value
        elif value is not None:
            cleaned[key] = value
    return cleaned


def output_report(
    report: JobReport,
    fmt: str,
    output_path: str | None,
    quiet: bool = False,
) -> None:
    """Write a report to a file or stdout.

    Args:
        report: The job report.
        fmt: Output format ('json', 'markdown' or, for the benchmark, 'csv').
        output_path: Output file path, or None for stdout.
        quiet: If True, suppress info messages.
    """
    generator = ReportGenerator()
    if fmt == "csv":
        if not isinstance(report, BenchReport):
            raise click.ClickException("CSV output is only available for the benchmark")
        content = generator.generate_csv(report)
    else:
        content = generator.render(report, ReportFormat(fmt))

    if output_path:
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        if not quiet:
            console.print(f"[green]Report written to:[/green] {path}")
    else:
        click.echo(content, nl=False)


def print_report_summary(report: JobReport) -> None:
    """Print a compact summary to stderr so stdout stays machine-readable."""
    summary = ReportGenerator().generate_summary(report)
    style = "green" if report.passed else "red"
    error_console.print(f"[{style}]{summary}[/{style}]")

    if isinstance(report, RunReport) and report.views:
        table = Table(title="Depth error per unit (mean over views)")
        table.add_column("Unit", justify="right")
        table.add_column("Resolution", justify="right")
        table.add_column("Mean abs", justify="right")
        table.add_column("< half spacing", justify="right")
        for index, unit in enumerate(report.views[0].units):
            rows = [v.units[index] for v in report.views]
            table.add_row(
                str(unit.unit),
                str(unit.resolution),
                f"{sum(r.mean_abs for r in rows) / len(rows):.4f}",
                f"{sum(r.within_half_spacing for r in rows) / len(rows):.3f}",
            )
        error_console.print(table)

    for check in report.failed_checks:
        error_console.print(f"  [red]FAILED[/red] {check.name}: {check.detail}")


def finish(report: JobReport, fmt: str, output: str | None, quiet: bool) -> None:
    if not quiet:
        print_report_summary(report)
    output_report(report, fmt, output, quiet)
    sys.exit(EXIT_SUCCESS if report.passed else EXIT_FAILURE)


def fail(e: Exception, verbose: bool) -> NoReturn:
    error_console.print(f"[red]Error:[/red] {e}")
    if verbose:
        import traceback

        error_console.print(traceback.format_exc())
    sys.exit(EXIT_FAILURE)


@click.group(invoke_without_command=True)
@click.option("--version", "-V", is_flag=True, help="Show version and exit.")
@click.option("--verbose", "-v", is_flag=True, help="Log debug output to stderr.")
@click.pass_context
def main(ctx: click.Context, version: bool, verbose: bool) -> None:
    """WarpBoost: iterative multi-view depth and Gaussian splat rendering.

    Estimates per-view depth by sweeping candidates through sparse warp
    indices and boosting probabilities unit by unit, then renders views
    from pixel-aligned Gaussians.

    \b
    Quick Start:
      warpboost gen-scene scenes/plane --preset plane
      warpboost depth scenes/plane -o depth.json
      warpboost render scenes/plane --depth-source predicted
      warpboost bench --depth 32 --channels 64
      warpboost gfm-check
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    configure_logging(verbose)

    if version:
        console.print(f"WarpBoost version {__version__}")
        ctx.exit(0)

    if ctx.invoked_subcommand is None:
        print_banner()
        console.print()
        console.print(ctx.get_help())


@main.command()
@click.argument("scene_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "-c", "config_file", type=click.Path(exists=True), help="Settings YAML file")
@click.option("--units", type=click.IntRange(1, 8), default=None, help="Number of units N")
@click.option("--layers", type=click.IntRange(1, 8), default=None, help="Attention layers per unit M")
@click.option("--resolutions", default=None, help="Unit resolutions, e.g. '64,128,256'")
@click.option("--candidates", default=None, help="Depth candidates per unit, e.g. '64,32,16'")
@click.option(
    "--spacing",
    type=click.Choice(["linear", "inverse_depth"]),
    default=None,
    help="Spacing of the first unit's candidates",
)
@click.option("--refine-radius", type=click.IntRange(0, 8), default=None, help="Correlation box filter radius")
@click.option(
    "--near",
    type=click.FloatRange(min=0.0, min_open=True),
    default=None,
    help="Near depth (default: the scene's)",
)
@click.option(
    "--far",
    type=click.FloatRange(min=0.0, min_open=True),
    default=None,
    help="Far depth (default: the scene's)",
)
@click.option("--invalid-fill", type=float, default=None, help="Correlation assigned to invalid samples before softmax")
@click.option("--sampling", type=click.Choice(["bilinear", "nearest"]), default=None, help="Warp sampling rule")
@click.option("--feature-downsample", type=click.IntRange(1, 2), default=None, help="Feature grid coarsening")
@click.option("--channels", type=click.IntRange(3, 1024), default=None, help="Feature channels C")
@click.option("--cache/--no-cache", "cache", default=None, help="Reuse warp indices across layers")
@click.option("--dump-dir", type=click.Path(), default=None, help="Where PFM dumps go (default: SCENE_DIR/predicted)")
@click.option("--dump/--no-dump", "dump", default=None, help="Write per-unit PFM depth maps")
@click.option("--timings/--no-timings", default=None, help="Include stage timings in the report")
@click.option("--output", "-o", type=click.Path(), help="Report file path (default: stdout)")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default=None, help="Report format")
@click.option("--quiet", "-q", is_flag=True, help="Suppress non-essential output")
@click.pass_context
def depth(
    ctx: click.Context,
    scene_dir: str,
    config_file: str | None,
    units: int | None,
    layers: int | None,
    resolutions: str | None,
    candidates: str | None,
    spacing: str | None,
    refine_radius: int | None,
    near: float | None,
    far: float | None,
    invalid_fill: float | None,
    sampling: str | None,
    feature_downsample: int | None,
    channels: int | None,
    cache: bool | None,
    dump_dir: str | None,
    dump: bool | None,
    timings: bool | None,
    output: str | None,
    fmt: str | None,
    quiet: bool,
) -> None:
    """Estimate depth for every view of a scene and score it against ground truth.

    \b
    Example:
      warpboost depth scenes/plane --units 3 --layers 2 -o depth.json
    """
    verbose = ctx.obj.get("verbose", False)
    resolution_list = parse_int_list(resolutions, "--resolutions")
    candidate_list = parse_int_list(candidates, "--candidates")
    if units is None and resolution_list is not None:
        units = len(resolution_list)

    try:
        settings = load_settings(
            config_file,
            drop_none(
                {
                    "pipeline": {
                        "units": units,
                        "layers_per_unit": layers,
                        "resolutions": resolution_list,
                        "candidates_per_unit": candidate_list,
                        "spacing": spacing,
                        "refine_radius": refine_radius,
                        "near": near,
                        "far": far,
                        "invalid_fill": invalid_fill,
                        "sampling": sampling,
                        "feature_downsample": feature_downsample,
                        "cache_warp_indices": cache,
                    },
                    "features": {"channels": channels},
                    "output": {"dump_pfm": dump, "include_timings": timings},
                }
            ),
        )

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            TimeElapsedColumn(),
            console=error_console,
            transient=True,
            disable=quiet,
        ) as progress:
            task_id = progress.add_task("[cyan]Estimating depth...[/cyan]", total=None)
            report = run_depth_job(
                scene_dir,
                settings,
                output_dir=dump_dir,
                on_view_end=lambda trace: progress.update(
                    task_id, description=f"[cyan]View {trace.view_index} done[/cyan]"
                ),
            )
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    finish(report, fmt or settings.output.format.value, output, quiet)


@main.command()
@click.argument("scene_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "-c", "config_file", type=click.Path(exists=True), help="Settings YAML file")
@click.option(
    "--depth-source",
    type=click.Choice([s.value for s in DepthSource]),
    default=DepthSource.GT.value,
    help="Depth used to place splats",
)
@click.option("--targets", default=None, help="Target view ids, e.g. '1' (default: middle view)")
@click.option("--include-targets", is_flag=True, help="Let target views contribute splats too")
@click.option("--predicted-dir", type=click.Path(), default=None, help="Depth job output (default: SCENE_DIR/predicted)")
@click.option("--render-dir", type=click.Path(), default=None, help="Where PNGs go (default: SCENE_DIR/renders)")
@click.option("--timings/--no-timings", default=None, help="Include stage timings in the report")
@click.option("--output", "-o", type=click.Path(), help="Report file path (default: stdout)")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default=None, help="Report format")
@click.option("--quiet", "-q", is_flag=True, help="Suppress non-essential output")
@click.pass_context
def render(
    ctx: click.Context,
    scene_dir: str,
    config_file: str | None,
    depth_source: str,
    targets: str | None,
    include_targets: bool,
    predicted_dir: str | None,
    render_dir: str | None,
    timings: bool | None,
    output: str | None,
    fmt: str | None,
    quiet: bool,
) -> None:
    """Render target views from the Gaussians of the other views.

    \b
    Example:
      warpboost render scenes/plane --depth-source predicted --targets 1
    """
    verbose = ctx.obj.get("verbose", False)
    target_list = parse_int_list(targets, "--targets")
    try:
        settings = load_settings(config_file, drop_none({"output": {"include_timings": timings}}))
        report = run_render_job(
            scene_dir,
            settings,
            depth_source=DepthSource(depth_source),
            targets=target_list,
            include_targets=include_targets,
            predicted_dir=predicted_dir,
            output_dir=render_dir,
        )
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    finish(report, fmt or settings.output.format.value, output, quiet)


@main.command()
@click.option("--height", type=click.IntRange(1), default=64, help="Feature grid height")
@click.option("--width", type=click.IntRange(1), default=64, help="Feature grid width")
@click.option("--depth", "depth_count", type=click.IntRange(2), default=32, help="Depth candidates D")
@click.option("--channels", type=click.IntRange(1), default=64, help="Feature channels C")
@click.option("--trials", type=int, default=3, help="Random trials")
@click.option("--seed", type=int, default=0, help="Seed of the trial stream")
@click.option(
    "--min-ratio",
    type=click.FloatRange(min=0.0),
    default=DEFAULT_MIN_RATIO,
    show_default=True,
    help="Fail unless dense/sparse bytes reach this ratio (0 disables)",
)
@click.option("--timings", is_flag=True, help="Include wall times in the report")
@click.option("--output", "-o", type=click.Path(), help="Report file path (default: stdout)")
@click.option(
    "--format", "-f", "fmt", type=click.Choice(["json", "markdown", "csv"]), default="markdown", help="Report format"
)
@click.option("--quiet", "-q", is_flag=True, help="Suppress non-essential output")
@click.pass_context
def bench(
    ctx: click.Context,
    height: int,
    width: int,
    depth_count: int,
    channels: int,
    trials: int,
    seed: int,
    min_ratio: float,
    timings: bool,
    output: str | None,
    fmt: str,
    quiet: bool,
) -> None:
    """Compare the materialised-warp and sparse-matrix correlation paths.

    \b
    Example:
      warpboost bench --height 64 --width 64 --depth 32 --channels 64 --min-ratio 4
    """
    verbose = ctx.obj.get("verbose", False)
    try:
        report = run_bench(
            height,
            width,
            depth_count,
            channels,
            trials,
            seed=seed,
            min_ratio=min_ratio or None,
            include_timings=timings,
        )
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    finish(report, fmt, output, quiet)


@main.command("gfm-check")
@click.option("--config", "-c", "config_file", type=click.Path(exists=True), help="Settings YAML file")
@click.option("--seed", type=int, default=None, help="Seed of the weights and features")
@click.option("--window", type=click.IntRange(1), default=None, help="Window side length")
@click.option("--heads", type=click.IntRange(1), default=None, help="Attention heads")
@click.option("--channels", type=click.IntRange(1), default=None, help="Token channels C")
@click.option("--schedule", default=None, help="Retained keys per layer, e.g. '256,256,128,128,64,64'")
@click.option("--height", type=click.IntRange(1), default=None, help="Token grid height (default: two windows)")
@click.option("--width", type=click.IntRange(1), default=None, help="Token grid width (default: two windows)")
@click.option("--shift/--no-shift", default=None, help="Shift windows on odd layers")
@click.option("--dense/--no-dense", default=True, help="Compare against the dense reference")
@click.option("--output", "-o", type=click.Path(), help="Report file path (default: stdout)")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "markdown"]), default=None, help="Report format")
@click.option("--quiet", "-q", is_flag=True, help="Suppress non-essential output")
@click.pass_context
def gfm_check(
    ctx: click.Context,
    config_file: str | None,
    seed: int | None,
    window: int | None,
    heads: int | None,
    channels: int | None,
    schedule: str | None,
    height: int | None,
    width: int | None,
    shift: bool | None,
    dense: bool,
    output: str | None,
    fmt: str | None,
    quiet: bool,
) -> None:
    """Check retained counts, nesting and normalisation of the focused attention module.

    \b
    Example:
      warpboost gfm-check --seed 3 --schedule 256,256,128,128,64,64
    """
    verbose = ctx.obj.get("verbose", False)
    schedule_list = parse_int_list(schedule, "--schedule")
    try:
        settings = load_settings(
            config_file,
            drop_none(
                {
                    "gfm": {
                        "seed": seed,
                        "window": window,
                        "heads": heads,
                        "channels": channels,
                        "retain_schedule": schedule_list,
                        "shift_windows": shift,
                    }
                }
            ),
        )
        cfg: GfmConfig = settings.gfm
        report = run_gfm_check(cfg, height, width, compare_dense=dense)
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    finish(report, fmt or settings.output.format.value, output, quiet)


@main.command("gen-scene")
@click.argument("output_dir", type=click.Path(file_okay=False))
@click.option(
    "--preset",
    type=click.Choice(sorted(PRESETS)),
    default=None,
    help="Bundled scene to start from",
)
@click.option("--config", "-c", "config_file", type=click.Path(exists=True), help="Scene YAML file")
@click.option("--kind", type=click.Choice([k.value for k in SceneKind]), default=None, help="Scene geometry")
@click.option("--texture", type=click.Choice([t.value for t in TextureKind]), default=None, help="Surface texture")
@click.option("--seed", "texture_seed", type=int, default=None, help="Texture seed")
@click.option("--views", type=click.IntRange(2), default=None, help="Number of cameras")
@click.option("--baseline", type=float, default=None, help="Distance between neighbouring cameras")
@click.option("--size", "image_size", type=click.IntRange(8), default=None, help="Square image side")
@click.option("--plane-depth", type=float, default=None, help="Front plane depth")
@click.option("--near", type=float, default=None, help="Near depth bound")
@click.option("--far", type=float, default=None, help="Far depth bound")
@click.pass_context
def gen_scene(
    ctx: click.Context,
    output_dir: str,
    preset: str | None,
    config_file: str | None,
    kind: str | None,
    texture: str | None,
    texture_seed: int | None,
    views: int | None,
    baseline: float | None,
    image_size: int | None,
    plane_depth: float | None,
    near: float | None,
    far: float | None,
) -> None:
    """Generate a synthetic scene directory with images, depth and poses.

    \b
    Example:
      warpboost gen-scene scenes/plane --preset plane --size 128
    """
    verbose = ctx.obj.get("verbose", False)
    overrides = drop_none(
        {
            "kind": kind,
            "texture": texture,
            "texture_seed": texture_seed,
            "views": views,
            "baseline": baseline,
            "image_size": image_size,
            "plane_depth": plane_depth,
            "near": near,
            "far": far,
        }
    )
    try:
        if config_file:
            data = yaml.safe_load(Path(config_file).read_text(encoding="utf-8")) or {}
            if not isinstance(data, dict):
                raise InvalidSceneFileError(f"{config_file} must contain a YAML mapping")
            cfg = SceneConfig.model_validate({**data, **overrides})
        elif preset:
            cfg = preset_config(preset, **overrides)
        else:
            cfg = SceneConfig.model_validate(overrides)
        scene = generate_scene(cfg)
        path = export_scene(scene, output_dir)
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    console.print(
        f"[green]Scene written to:[/green] {path} "
        f"({cfg.kind.value}, {cfg.views} views, {cfg.image_size}px)"
    )


CONFIG_TEMPLATE = """\
# WarpBoost Configuration
# Values here are overridden by WARPBOOST_* environment variables and CLI flags.

features:
  # Feature provider: pyramid or external
  kind: pyramid
  # Channels C (pyramid channels are zero-padded or truncated to this)
  channels: 64
  levels: 3
  standardize: true
  match_logit: 96.0
  # source_path: features/   # required for kind: external

pipeline:
  units: 3
  layers_per_unit: 2
  resolutions: [64, 128, 256]
  candidates_per_unit: [64, 32, 16]
  # near/far default to the scene's range
  # near: 1.0
  # far: 4.0
  spacing: inverse_depth
  refine_radius: 1
  sampling: bilinear
  feature_downsample: 1
  cache_warp_indices: true

gfm:
  window: 16
  heads: 6
  channels: 256
  retain_schedule: [256, 256, 128, 128, 64, 64]
  residual: true
  shift_windows: true
  seed: 0

splat:
  s_min: 0.0001
  s_scale: 1.0
  footprint_factor: 0.25
  opacity: 0.98
  antialias: 0.3

output:
  # Report format: json or markdown
  format: json
  dump_pfm: true
  include_timings: false
"""

SCENE_TEMPLATE = """\
# WarpBoost synthetic scene
# Generate with: warpboost gen-scene scenes/sample --config scene.yaml

kind: textured_plane      # textured_plane, box_room or two_planes
texture: checker          # checker, noise or gradient_mix
texture_seed: 0
texture_cycles: 8.0       # texture periods across the image at plane_depth
plane_depth: 2.0
views: 3
baseline: 0.2
image_size: 64
near: 1.0
far: 4.0
"""


@main.command()
@click.option(
    "--output",
    "-o",
    type=click.Path(),
    default=".",
    help="Directory to create files in",
)
@click.option(
    "--force",
    is_flag=True,
    help="Overwrite existing files",
)
def init(output: str, force: bool) -> None:
    """Initialize a new WarpBoost project with sample files.

    Creates:
      - warpboost.yaml (configuration)
      - scene.yaml (sample synthetic scene)
    """
    output_dir = Path(output)
    output_dir.mkdir(parents=True, exist_ok=True)

    files_created = []
    for path, content in (
        (output_dir / "warpboost.yaml", CONFIG_TEMPLATE),
        (output_dir / "scene.yaml", SCENE_TEMPLATE),
    ):
        if path.exists() and not force:
            console.print(f"[yellow]Skipping {path} (already exists, use --force to overwrite)[/yellow]")
        else:
            path.write_text(content, encoding="utf-8")
            files_created.append(path)

    if files_created:
        console.print("[green]Created files:[/green]")
        for path in files_created:
            console.print(f"  {path}")

        console.print()
        console.print("[dim]Next steps:[/dim]")
        console.print("  1. Generate a scene: warpboost gen-scene scenes/sample --config scene.yaml")
        console.print("  2. Estimate depth: warpboost depth scenes/sample --resolutions 16,32,64")
        console.print("  3. Render the middle view: warpboost render scenes/sample --depth-source predicted")
    else:
        console.print("[yellow]No files created (all already exist)[/yellow]")
