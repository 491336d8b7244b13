"""Report models for WarpBoost jobs.

Every job returns one of these Pydantic models. Reports embed the resolved
configuration and carry a list of asserted properties; a job succeeds only
when every property passes. Wall-clock timings are optional so that
default reports are identical across reruns.
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, Field


class DepthSource(str, Enum):
    """Where the depths used to place splats come from."""

    GT = "gt"  # Ground-truth depth of the scene
    PREDICTED = "predicted"  # Depth maps dumped by the depth job


class PropertyCheck(BaseModel):
    """One asserted property of a job's output."""

    name: str = Field(description="Short property name, e.g. 'row_sums'")
    passed: bool = Field(description="Whether the property held")
    detail: str = Field(default="", description="Measured value or explanation")

    model_config = {"extra": "forbid"}


class JobReport(BaseModel):
    """Fields shared by every report."""

    config: dict[str, Any] = Field(
        default_factory=dict,
        description="Fully resolved configuration the job ran with",
    )
    checks: list[PropertyCheck] = Field(default_factory=list, description="Asserted properties")
    timings: dict[str, float] | None = Field(
        default=None,
        description="Seconds per stage, present only when requested",
    )

    model_config = {"extra": "forbid"}

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> list[PropertyCheck]:
        return [check for check in self.checks if not check.passed]


class UnitErrorStats(BaseModel):
    """Depth error of one iteration unit against ground truth."""

    unit: int = Field(ge=1, description="1-indexed unit number")
    resolution: int = Field(ge=1, description="Unit height in pixels")
    candidates: int = Field(ge=1, description="Depth candidates D")
    range_width: float | None = Field(
        default=None,
        description="Residual search range, or None for the absolute first unit",
    )
    mean_abs: float = Field(description="Mean |D - gt| over covisible pixels")
    mean_abs_rel: float = Field(description="Mean |D - gt| / gt over covisible pixels")
    within_half_spacing: float = Field(
        ge=0.0,
        le=1.0,
        description="Fraction of pixels within half a candidate spacing of gt",
    )
    pixels: int = Field(ge=0, description="Covisible pixels evaluated")

    model_config = {"extra": "forbid"}


class ViewDepthReport(BaseModel):
    """Per-unit errors for one target view."""

    view: int = Field(ge=0, description="Target view index")
    units: list[UnitErrorStats] = Field(description="One row per unit, in order")

    model_config = {"extra": "forbid"}

    @property
    def final_mean_abs(self) -> float:
        return self.units[-1].mean_abs


class RunReport(JobReport):
    """Result of the depth job."""

    scene: str = Field(description="Scene directory")
    views: list[ViewDepthReport] = Field(default_factory=list, description="Per-view errors")
    peak_correlation_bytes: int = Field(
        ge=0,
        description="Peak transient bytes held by the correlation stage",
    )

    def mean_final_error(self) -> float:
        if not self.views:
            return 0.0
        return sum(v.final_mean_abs for v in self.views) / len(self.views)


class ViewMetrics(BaseModel):
    """Image quality of one rendered target view."""

    view: int = Field(ge=0, description="Target view index")
    psnr: float = Field(description="PSNR in dB against the scene image")
    ssim: float = Field(description="Mean SSIM against the scene image")
    held_out: bool = Field(description="True when the view contributed no splats")

    model_config = {"extra": "forbid"}


class RenderReport(JobReport):
    """Result of the render job."""

    scene: str = Field(description="Scene directory")
    depth_source: DepthSource = Field(description="Depth used to place splats")
    splats: int = Field(ge=0, description="Splats rasterized per target")
    targets: list[ViewMetrics] = Field(default_factory=list, description="Per-target metrics")


class BenchTrial(BaseModel):
    """One dense-versus-sparse correlation measurement."""

    trial: int = Field(ge=0, description="0-indexed trial number")
    dense_bytes: int = Field(ge=0, description="Peak transient bytes of the dense path")
    sparse_bytes: int = Field(ge=0, description="Peak transient bytes of the sparse path")
    ratio: float = Field(description="dense_bytes / sparse_bytes")
    max_abs_diff: float = Field(ge=0.0, description="Largest value disagreement")
    dense_seconds: float | None = Field(default=None, description="Dense wall time")
    sparse_seconds: float | None = Field(default=None, description="Sparse wall time")

    model_config = {"extra": "forbid"}


class BenchReport(JobReport):
    """Result of the correlation benchmark."""

    height: int = Field(ge=1)
    width: int = Field(ge=1)
    depth: int = Field(ge=1, description="Depth candidates D")
    channels: int = Field(ge=1, description="Feature channels C")
    seed: int = Field(description="Seed of the random camera pairs and features")
    trials: list[BenchTrial] = Field(default_factory=list)

    @property
    def min_ratio(self) -> float:
        return min((t.ratio for t in self.trials), default=0.0)

    @property
    def max_abs_diff(self) -> float:
        return max((t.max_abs_diff for t in self.trials), default=0.0)


class GfmCheckReport(JobReport):
    """Result of the windowed-attention property suite."""

    seed: int = Field(description="Seed of the generated weights and features")
    window: int = Field(ge=1)
    heads: int = Field(ge=1)
    channels: int = Field(ge=1)
    retain_schedule: list[int] = Field(description="Retained keys per layer")
    counts: list[int] = Field(default_factory=list, description="Observed retained keys per layer")
    dense_max_diff: float | None = Field(
        default=None,
        description="Largest difference to the dense reference, when compared",
    )
