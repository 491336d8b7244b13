"""Property suite for the windowed focused attention module."""

import logging

import numpy as np

from warpboost.config.settings import GfmConfig
from warpboost.core.models import GfmCheckReport, PropertyCheck
from warpboost.gfm.module import GfmTrace, dense_focused_reference, run_gfm
from warpboost.gfm.weights import GfmWeights, generate_weights, validate_schedule
from warpboost.tensorio.rng import Rng

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
DENSE_TOLERANCE = 1e-5
FEATURE_STREAM = 9_999


def seeded_features(cfg: GfmConfig, height: int, width: int) -> np.ndarray:
    """Standard normal token features drawn from the config's seed."""
    return Rng(cfg.seed).spawn(FEATURE_STREAM).normal((height, width, cfg.channels))


def _dense_difference(cfg: GfmConfig, weights: GfmWeights, features: np.ndarray) -> float:
    """Largest gap to the dense reference, run unshifted with every slot retained."""
    tokens = cfg.window * cfg.window
    full = GfmWeights(weights.layers, weights.heads, weights.window, [tokens] * len(weights.layers))
    sparse = run_gfm(features, full, residual=cfg.residual, shift_windows=False)
    dense = dense_focused_reference(features, full, residual=cfg.residual, shift_windows=False)
    return float(np.abs(sparse - dense).max())


def run_gfm_check(
    cfg: GfmConfig,
    height: int | None = None,
    width: int | None = None,
    compare_dense: bool = True,
) -> GfmCheckReport:
    """Run the module on seeded weights and features and check its invariants.

    Checked properties: retained counts follow the schedule, every
    layer's slots are a subset of the previous layer's, weight rows sum to
    one and, when ``compare_dense`` is set, the sparse module equals the
    dense reference when nothing is pruned.

    Args:
        cfg: Module configuration.
        height: Token grid height (two windows by default).
        width: Token grid width (two windows by default).
        compare_dense: Also compare against the dense reference.

    Raises:
        ScheduleExceedsWindowError: If a schedule entry exceeds ``window²``.
        ZeroRetainError: If a schedule entry is below 1.
        InvalidScheduleError: If the schedule is empty or increasing.
        IndivisibleWindowError: If the window does not tile the grid.
    """
    validate_schedule(cfg.retain_schedule, cfg.window)
    height = height or 2 * cfg.window
    width = width or 2 * cfg.window

    weights = generate_weights(cfg)
    features = seeded_features(cfg, height, width)
    trace = GfmTrace()
    output = run_gfm(features, weights, residual=cfg.residual, shift_windows=cfg.shift_windows, trace=trace)

    counts = trace.counts()
    row_error = trace.max_row_error()
    violations = trace.nesting_violations()
    checks = [
        PropertyCheck(
            name="retained_counts",
            passed=counts == list(cfg.retain_schedule),
            detail=f"observed {counts}",
        ),
        PropertyCheck(
            name="nesting",
            passed=violations == 0,
            detail=f"{violations} rows keep a slot dropped earlier",
        ),
        PropertyCheck(
            name="row_sums",
            passed=row_error <= ROW_SUM_TOLERANCE,
            detail=f"max |sum(A) - 1| = {row_error:.3e}",
        ),
        PropertyCheck(
            name="finite_output",
            passed=bool(np.all(np.isfinite(output))),
            detail="all output features finite",
        ),
    ]

    dense_diff = None
    if compare_dense:
        dense_diff = _dense_difference(cfg, weights, features)
        checks.append(
            PropertyCheck(
                name="dense_equivalence",
                passed=dense_diff < DENSE_TOLERANCE,
                detail=f"max |sparse - dense| = {dense_diff:.3e} with every slot retained",
            )
        )

    logger.info(f"GFM check seed={cfg.seed} window={cfg.window}: counts {counts}")
    return GfmCheckReport(
        seed=cfg.seed,
        window=cfg.window,
        heads=cfg.heads,
        channels=cfg.channels,
        retain_schedule=list(cfg.retain_schedule),
        counts=counts,
        dense_max_diff=dense_diff,
        config=cfg.model_dump(mode="json") | {"height": height, "width": width},
        checks=checks,
    )
