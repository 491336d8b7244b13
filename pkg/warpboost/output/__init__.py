"""Report formatting for WarpBoost jobs."""

from warpboost.output.report import ReportGenerator

__all__ = ["ReportGenerator"]
