"""Core WarpBoost functionality: errors, report models and stage timing."""

from warpboost.core.errors import WarpboostError
from warpboost.core.models import (
    BenchReport,
    BenchTrial,
    DepthSource,
    GfmCheckReport,
    JobReport,
    PropertyCheck,
    RenderReport,
    RunReport,
    UnitErrorStats,
    ViewDepthReport,
    ViewMetrics,
)
from warpboost.core.timing import StageTimer

__all__ = [
    "BenchReport",
    "BenchTrial",
    "DepthSource",
    "GfmCheckReport",
    "JobReport",
    "PropertyCheck",
    "RenderReport",
    "RunReport",
    "StageTimer",
    "UnitErrorStats",
    "ViewDepthReport",
    "ViewMetrics",
    "WarpboostError",
]
