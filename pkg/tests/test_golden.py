"""Golden file tests for WarpBoost.

These tests check the numeric building blocks against hand-computed
values kept in a fixture file. Any change in behavior will cause these
tests to fail, indicating a potential regression.
"""

from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

from warpboost.boosting import boost
from warpboost.config import DepthSpacing
from warpboost.core import errors
from warpboost.geometry import (
    Intrinsics,
    Pose,
    build_camera,
    compute_warp_indices,
    residual_candidates,
    sample_depth_candidates,
)
from warpboost.gfm import validate_schedule
from warpboost.splat import psnr

# Load golden file fixture
FIXTURES_DIR = Path(__file__).parent / "fixtures"
GOLDEN_FILE = FIXTURES_DIR / "golden_cases.yaml"

with open(GOLDEN_FILE, encoding="utf-8") as f:
    GOLDEN: dict[str, list[dict[str, Any]]] = yaml.safe_load(f)


def cases(section: str) -> Any:
    """Parametrize over a fixture section, one test id per case."""
    return pytest.mark.parametrize("case", GOLDEN[section], ids=[c["id"] for c in GOLDEN[section]])


class TestGoldenFile:
    """Sanity checks on the fixture itself."""

    def test_sections_present(self) -> None:
        """Every section has at least one case."""
        for section in (
            "depth_candidates",
            "residual_offsets",
            "boosting",
            "stereo_disparity",
            "psnr",
            "retain_schedules",
        ):
            assert GOLDEN.get(section), f"missing golden section '{section}'"


class TestCandidates:
    """Depth hypothesis grids."""

    @cases("depth_candidates")
    def test_absolute(self, case: dict[str, Any]) -> None:
        """Absolute candidates hit the expected depths and both bounds exactly."""
        grid = sample_depth_candidates(case["near"], case["far"], case["count"], DepthSpacing(case["spacing"]))

        np.testing.assert_allclose(grid.values, case["expected"], rtol=1e-12)
        assert grid.values[0] == case["near"]
        assert grid.values[-1] == case["far"]

    @cases("residual_offsets")
    def test_residual(self, case: dict[str, Any]) -> None:
        """Residual offsets are evenly spaced and symmetric about zero."""
        grid = residual_candidates(case["range_width"], case["count"], 1.0, 4.0)

        np.testing.assert_allclose(grid.values, case["expected"], atol=1e-12)
        np.testing.assert_array_equal(grid.values, -grid.values[::-1])


class TestBoosting:
    """Multiplicative probability updates."""

    @cases("boosting")
    def test_boost(self, case: dict[str, Any]) -> None:
        """Prior times attention, renormalised per pixel."""
        prior = np.array(case["prior"])[None, None, :]
        attention = np.array(case["attention"])[None, None, :]

        np.testing.assert_allclose(boost(prior, attention)[0, 0], case["expected"], rtol=1e-12)


class TestStereoDisparity:
    """Warp indices between rectified cameras."""

    @cases("stereo_disparity")
    def test_disparity(self, case: dict[str, Any]) -> None:
        """Each target pixel reads the source pixel `disparity` columns to its left."""
        size, focal, shift = case["size"], case["focal"], case["disparity"]
        intrinsics = Intrinsics(fx=focal, fy=focal, cx=size / 2, cy=size / 2, width=size, height=size)
        target = build_camera(intrinsics, Pose.identity())
        source = build_camera(intrinsics, Pose(np.eye(3), np.array([-case["baseline"], 0.0, 0.0])))
        grid = sample_depth_candidates(case["depth"], case["depth"] + 1.0, 2, DepthSpacing.LINEAR)

        warp = compute_warp_indices(target, source, grid)

        assert not warp.valid[:, :shift, 0].any()
        assert warp.valid[:, shift:, 0].all()
        ys, xs = np.mgrid[0:size, shift:size]
        np.testing.assert_array_equal(warp.indices[:, shift:, 0, 0], ys * size + xs - shift)


class TestMetrics:
    """Image metrics."""

    @cases("psnr")
    def test_psnr(self, case: dict[str, Any]) -> None:
        """A constant offset gives PSNR -20 log10(offset)."""
        image = np.full((4, 4, 3), 0.25)

        assert psnr(image, image + case["offset"]) == pytest.approx(case["expected"], abs=1e-9)


class TestRetainSchedules:
    """Retain schedule validation."""

    @cases("retain_schedules")
    def test_schedule(self, case: dict[str, Any]) -> None:
        """Valid schedules pass; invalid ones raise the recorded error."""
        if case["error"] is None:
            validate_schedule(case["schedule"], case["window"])
            return

        with pytest.raises(getattr(errors, case["error"])):
            validate_schedule(case["schedule"], case["window"])
