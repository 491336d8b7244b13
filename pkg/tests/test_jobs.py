"""Tests for the batch jobs behind the CLI."""

import json
import shutil
import tempfile
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest

from warpboost.config import GfmConfig, Settings
from warpboost.core.errors import (
    IndivisibleWindowError,
    InvalidScheduleError,
    MissingDepthError,
    MissingPosesError,
    NoTrialsError,
    PipelineConfigError,
    ScheduleExceedsWindowError,
    UnknownViewError,
)
from warpboost.core.models import DepthSource
from warpboost.jobs import run_bench, run_depth_job, run_gfm_check, run_render_job
from warpboost.output import ReportGenerator
from warpboost.scenes import SceneConfig, TextureKind, export_scene, generate_scene
from warpboost.tensorio import read_pfm


def small_settings(**output: object) -> Settings:
    """Two units at 16 and 32 px over 16 feature channels."""
    return Settings.model_validate(
        {
            "pipeline": {"units": 2, "resolutions": [16, 32], "candidates_per_unit": [8, 4]},
            "features": {"channels": 16},
            "output": output,
        }
    )


@pytest.fixture
def scene_dir() -> Iterator[Path]:
    """A three-view 32 px noise plane exported to a fresh directory."""
    tmpdir = Path(tempfile.mkdtemp())
    cfg = SceneConfig(texture=TextureKind.NOISE, texture_cycles=4, views=3, image_size=32, plane_depth=2.0)
    export_scene(generate_scene(cfg), tmpdir / "scene")
    yield tmpdir / "scene"
    shutil.rmtree(tmpdir, ignore_errors=True)


class TestDepthJob:
    """Tests for the depth job."""

    def test_report_and_dumps(self, scene_dir: Path) -> None:
        """Every view gets a row per unit and its depth maps on disk."""
        report = run_depth_job(scene_dir, small_settings())

        assert report.passed, report.failed_checks
        assert [v.view for v in report.views] == [0, 1, 2]
        units = report.views[0].units
        assert [u.resolution for u in units] == [16, 32]
        assert [u.candidates for u in units] == [8, 4]
        assert units[0].range_width is None
        assert units[1].range_width is not None and units[1].range_width > 0
        assert report.peak_correlation_bytes > 0
        assert report.timings is None
        # the scene's depth range fills the unset pipeline bounds
        assert report.config["pipeline"]["near"] == 1.0
        assert report.config["pipeline"]["far"] == 4.0

        predicted = scene_dir / "predicted"
        assert read_pfm(predicted / "view_01.pfm").shape == (32, 32)
        assert read_pfm(predicted / "view_01_unit1.pfm").shape == (16, 16)
        assert (predicted / "view_02_unit2.pfm").exists()

    def test_reports_are_reproducible(self, scene_dir: Path) -> None:
        """Without timings, reruns give byte-identical reports."""
        generator = ReportGenerator()
        settings = small_settings(dump_pfm=False)

        first = generator.generate_json(run_depth_job(scene_dir, settings))
        second = generator.generate_json(run_depth_job(scene_dir, settings))

        assert first == second
        assert not (scene_dir / "predicted").exists()

    def test_timings_on_request(self, scene_dir: Path) -> None:
        """Stage timings are recorded only when asked for."""
        report = run_depth_job(scene_dir, small_settings(dump_pfm=False, include_timings=True))

        assert report.timings is not None
        assert all(seconds >= 0.0 for seconds in report.timings.values())

    def test_resolution_must_divide_image(self, scene_dir: Path) -> None:
        """Unit grids are integer fractions of the image."""
        settings = Settings.model_validate(
            {"pipeline": {"units": 1, "resolutions": [24], "candidates_per_unit": [8]}}
        )

        with pytest.raises(PipelineConfigError):
            run_depth_job(scene_dir, settings)

    def test_missing_scene(self) -> None:
        """A directory without poses is not a scene."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(MissingPosesError):
                run_depth_job(tmpdir, small_settings())


class TestRenderJob:
    """Tests for the render job."""

    def test_ground_truth_render(self, scene_dir: Path) -> None:
        """The middle view is held out and rendered from the others."""
        report = run_render_job(scene_dir, Settings())

        assert report.passed
        assert report.depth_source == DepthSource.GT
        assert report.splats == 2 * 32 * 32
        assert [m.view for m in report.targets] == [1]
        assert report.targets[0].held_out
        assert report.targets[0].psnr > 15.0
        assert -1.0 <= report.targets[0].ssim <= 1.0
        assert (scene_dir / "renders" / "view_01_gt.png").exists()

    def test_including_targets(self, scene_dir: Path) -> None:
        """With include_targets every view contributes splats."""
        report = run_render_job(scene_dir, Settings(), targets=[0, 2], include_targets=True)

        assert report.splats == 3 * 32 * 32
        assert not any(m.held_out for m in report.targets)

    def test_unknown_target(self, scene_dir: Path) -> None:
        """Targets must be views of the scene."""
        with pytest.raises(UnknownViewError):
            run_render_job(scene_dir, Settings(), targets=[3])

    def test_predicted_depth_needs_depth_job(self, scene_dir: Path) -> None:
        """Predicted depth is read from the depth job's dumps."""
        with pytest.raises(MissingDepthError):
            run_render_job(scene_dir, Settings(), depth_source=DepthSource.PREDICTED)

        run_depth_job(scene_dir, small_settings())
        report = run_render_job(scene_dir, Settings(), depth_source=DepthSource.PREDICTED)

        assert report.depth_source == DepthSource.PREDICTED
        assert np.isfinite(report.targets[0].psnr)
        assert (scene_dir / "renders" / "view_01_predicted.png").exists()


class TestBench:
    """Tests for the correlation benchmark."""

    def test_paths_agree_and_sparse_is_smaller(self) -> None:
        """Both paths give the same volume; the sparse one holds fewer bytes."""
        report = run_bench(16, 16, 8, 32, trials=2, seed=1, min_ratio=1.0)

        assert report.passed, report.failed_checks
        assert [t.trial for t in report.trials] == [0, 1]
        assert all(t.ratio > 1.0 for t in report.trials)
        assert report.max_abs_diff < 1e-5
        assert report.timings is None
        assert report.trials[0].dense_seconds is None

    def test_unreachable_ratio_fails(self) -> None:
        """An impossible ratio target fails the memory check only."""
        report = run_bench(8, 8, 4, 32, trials=1, min_ratio=1e9)

        assert not report.passed
        assert [c.name for c in report.failed_checks] == ["memory_ratio"]

    def test_default_ratio_is_checked(self) -> None:
        """The 4x memory target applies unless the caller opts out."""
        small = run_bench(8, 8, 4, 16, trials=1)
        unchecked = run_bench(8, 8, 4, 16, trials=1, min_ratio=None)

        assert [c.name for c in small.failed_checks] == ["memory_ratio"]
        assert small.config["min_ratio"] == 4.0
        assert unchecked.passed, unchecked.failed_checks
        assert "memory_ratio" not in [c.name for c in unchecked.checks]


    def test_seeded_runs_match(self) -> None:
        """The same seed gives the same report."""
        a = run_bench(8, 8, 4, 16, trials=2, seed=7)
        b = run_bench(8, 8, 4, 16, trials=2, seed=7)

        assert json.loads(a.model_dump_json()) == json.loads(b.model_dump_json())

    def test_timings(self) -> None:
        """Wall times appear per trial and in total when requested."""
        report = run_bench(8, 8, 4, 16, trials=1, include_timings=True)

        assert report.timings is not None
        assert set(report.timings) == {"dense", "sparse"}
        assert report.trials[0].sparse_seconds is not None

    def test_zero_trials(self) -> None:
        """At least one trial is required."""
        with pytest.raises(NoTrialsError):
            run_bench(8, 8, 4, 16, trials=0)


class TestGfmCheck:
    """Tests for the windowed-attention property suite."""

    def test_small_module_passes(self) -> None:
        """A well-formed schedule passes every property."""
        cfg = GfmConfig(window=4, heads=2, channels=8, retain_schedule=[16, 8, 4], seed=2)

        report = run_gfm_check(cfg)

        assert report.passed, report.failed_checks
        assert report.counts == [16, 8, 4]
        assert report.dense_max_diff is not None and report.dense_max_diff < 1e-5
        assert report.config["height"] == 8

    def test_skip_dense_comparison(self) -> None:
        """The dense comparison is optional."""
        cfg = GfmConfig(window=4, heads=1, channels=4, retain_schedule=[4], seed=0)

        report = run_gfm_check(cfg, compare_dense=False)

        assert report.dense_max_diff is None
        assert "dense_equivalence" not in [c.name for c in report.checks]

    def test_schedule_errors(self) -> None:
        """Increasing or oversized schedules are refused before running."""
        with pytest.raises(InvalidScheduleError):
            run_gfm_check(GfmConfig(window=4, heads=1, channels=4, retain_schedule=[4, 8]))
        with pytest.raises(ScheduleExceedsWindowError):
            run_gfm_check(GfmConfig(window=4, heads=1, channels=4, retain_schedule=[17]))

    def test_grid_must_tile(self) -> None:
        """The window must divide the token grid."""
        cfg = GfmConfig(window=4, heads=1, channels=4, retain_schedule=[8], shift_windows=False)

        with pytest.raises(IndivisibleWindowError):
            run_gfm_check(cfg, height=6, width=8)
