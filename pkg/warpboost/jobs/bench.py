"""Dense versus sparse correlation benchmark.

Each trial draws a random stereo pair and random features, then runs the
materialised-warp correlation and the sparse-matrix correlation on the
same inputs. Byte counters measure the transient buffers of each path.
"""

import logging
import time
from collections.abc import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from warpboost.config.settings import DepthSpacing, SamplingMode
from warpboost.core.errors import NoTrialsError
from warpboost.core.models import BenchReport, BenchTrial, PropertyCheck
from warpboost.epipolar.correlation import dense_correlation, smm_correlation
from warpboost.epipolar.memory import ByteCounter
from warpboost.geometry.camera import CameraView, Intrinsics, Pose
from warpboost.geometry.candidates import sample_depth_candidates
from warpboost.geometry.warp import compute_warp_indices
from warpboost.tensorio.rng import Rng

logger = logging.getLogger(__name__)

AGREEMENT_TOLERANCE = 1e-5
DEFAULT_MIN_RATIO = 4.0
BENCH_NEAR = 1.0
BENCH_FAR = 4.0


def random_stereo_pair(rng: Rng, height: int, width: int) -> tuple[CameraView, CameraView]:
    """A target at the origin and a source displaced sideways with a small random rotation."""
    focal = float(max(height, width))
    intrinsics = Intrinsics(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0, width=width, height=height)
    rotation = Rotation.from_rotvec(rng.normal((3,), 0.03)).as_matrix()
    offset = np.array([0.1, 0.0, 0.0]) + rng.normal((3,), 0.05)
    return CameraView(intrinsics, Pose.identity()), CameraView(intrinsics, Pose(rotation, offset))


def run_trial(
    rng: Rng,
    height: int,
    width: int,
    depth: int,
    channels: int,
    sampling: SamplingMode = SamplingMode.BILINEAR,
) -> tuple[BenchTrial, float, float]:
    """One measurement; returns the trial and the wall time of each path."""
    target, source = random_stereo_pair(rng, height, width)
    target_features = rng.normal((height, width, channels)).astype(np.float32)
    source_features = rng.normal((height, width, channels)).astype(np.float32)
    grid = sample_depth_candidates(BENCH_NEAR, BENCH_FAR, depth, DepthSpacing.INVERSE_DEPTH)

    dense_counter = ByteCounter()
    start = time.perf_counter()
    dense = dense_correlation(
        target_features, source_features, target, source, grid, sampling=sampling, counter=dense_counter
    )
    dense_seconds = time.perf_counter() - start

    sparse_counter = ByteCounter()
    start = time.perf_counter()
    warp = compute_warp_indices(target, source, grid, sampling=sampling)
    sparse = smm_correlation(target_features, source_features, warp, counter=sparse_counter)
    sparse_seconds = time.perf_counter() - start

    diff = np.abs(dense.values.astype(np.float64) - sparse.values.astype(np.float64))
    mismatched = int(np.sum(dense.valid != sparse.valid))
    if mismatched:
        logger.warning(f"{mismatched} entries differ in validity between the two paths")
    trial = BenchTrial(
        trial=0,
        dense_bytes=dense_counter.peak,
        sparse_bytes=sparse_counter.peak,
        ratio=dense_counter.peak / max(sparse_counter.peak, 1),
        max_abs_diff=float(diff.max()) if diff.size else 0.0,
    )
    return trial, dense_seconds, sparse_seconds


def run_bench(
    height: int,
    width: int,
    depth: int,
    channels: int,
    trials: int,
    seed: int = 0,
    min_ratio: float | None = DEFAULT_MIN_RATIO,
    include_timings: bool = False,
    on_trial: Callable[[BenchTrial], None] | None = None,
) -> BenchReport:
    """Run ``trials`` dense-versus-sparse measurements.

    Args:
        height: Feature grid height.
        width: Feature grid width.
        depth: Depth candidates D.
        channels: Feature channels C.
        trials: Number of random trials.
        seed: Seed of the trial stream.
        min_ratio: Every dense/sparse byte ratio must reach this; None skips
            the memory check.
        include_timings: Record wall times per trial.
        on_trial: Called after each trial.

    Raises:
        NoTrialsError: If ``trials < 1``.
    """
    if trials < 1:
        raise NoTrialsError(f"the benchmark needs at least one trial, got {trials}")

    rng = Rng(seed)
    results = []
    totals = {"dense": 0.0, "sparse": 0.0}
    for index in range(trials):
        trial, dense_seconds, sparse_seconds = run_trial(rng.spawn(index), height, width, depth, channels)
        update: dict[str, object] = {"trial": index}
        if include_timings:
            update.update(dense_seconds=round(dense_seconds, 6), sparse_seconds=round(sparse_seconds, 6))
        trial = trial.model_copy(update=update)
        totals["dense"] += dense_seconds
        totals["sparse"] += sparse_seconds
        results.append(trial)
        logger.debug(f"Trial {index}: ratio {trial.ratio:.2f}, max diff {trial.max_abs_diff:.2e}")
        if on_trial is not None:
            on_trial(trial)

    report = BenchReport(
        height=height,
        width=width,
        depth=depth,
        channels=channels,
        seed=seed,
        trials=results,
        config={
            "height": height,
            "width": width,
            "depth": depth,
            "channels": channels,
            "trials": trials,
            "seed": seed,
            "min_ratio": min_ratio,
        },
        timings={k: round(v, 6) for k, v in totals.items()} if include_timings else None,
    )
    report.checks.append(
        PropertyCheck(
            name="agreement",
            passed=report.max_abs_diff < AGREEMENT_TOLERANCE,
            detail=f"max |dense - sparse| = {report.max_abs_diff:.3e}",
        )
    )
    if min_ratio is not None:
        report.checks.append(
            PropertyCheck(
                name="memory_ratio",
                passed=report.min_ratio >= min_ratio,
                detail=f"min dense/sparse bytes = {report.min_ratio:.2f} (required {min_ratio})",
            )
        )
    logger.info(f"Bench {height}x{width} D={depth} C={channels}: min ratio {report.min_ratio:.2f}")
    return report
