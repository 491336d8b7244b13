"""Depth probability boosting and the iterative depth pipeline."""

from warpboost.boosting.dpbu import (
    BoostState,
    boost,
    expected_candidate,
    run_dpbu,
    uniform_probabilities,
    update_depth,
)
from warpboost.boosting.pipeline import (
    CountingHooks,
    IterationTrace,
    IterativeDepthEstimator,
    LoggingHooks,
    PipelineHooks,
    UnitTrace,
    next_search_range,
    run_iterative_depth,
)

__all__ = [
    "BoostState",
    "CountingHooks",
    "IterationTrace",
    "IterativeDepthEstimator",
    "LoggingHooks",
    "PipelineHooks",
    "UnitTrace",
    "boost",
    "expected_candidate",
    "next_search_range",
    "run_dpbu",
    "run_iterative_depth",
    "uniform_probabilities",
    "update_depth",
]
