"""Settings and configuration models.

This module defines the configuration schema for WarpBoost and
implements configuration loading with proper precedence.

Configuration Precedence (highest to lowest):
1. CLI flags
2. Environment variables (WARPBOOST_*)
3. Project config file (./warpboost.yaml)
4. User config file (~/.warpboost.yaml)
5. Defaults
"""

import os
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, model_validator


class FeatureKind(str, Enum):
    """Where per-view feature maps come from."""

    PYRAMID = "pyramid"  # Deterministic image filters
    EXTERNAL = "external"  # TNSR files produced by another tool


class DepthSpacing(str, Enum):
    """How absolute depth candidates are spread over the range."""

    LINEAR = "linear"
    INVERSE_DEPTH = "inverse_depth"


class SamplingMode(str, Enum):
    """How warped positions are sampled in the source grid."""

    BILINEAR = "bilinear"
    NEAREST = "nearest"


class ReportFormat(str, Enum):
    """Supported report formats."""

    JSON = "json"
    MARKDOWN = "markdown"


class FeatureProviderConfig(BaseModel):
    """Configuration for per-view feature extraction."""

    kind: FeatureKind = Field(
        default=FeatureKind.PYRAMID,
        description="Feature provider to use",
    )
    channels: int = Field(
        default=64,
        ge=3,
        description="Number of feature channels C",
    )
    levels: int = Field(
        default=3,
        ge=1,
        description="Number of box-blur radii in the pyramid recipe",
    )
    source_path: Path | None = Field(
        default=None,
        description="Directory of TNSR feature files (external kind)",
    )
    standardize: bool = Field(
        default=True,
        description="Scale each pyramid channel to zero mean and unit variance",
    )
    match_logit: float | None = Field(
        default=96.0,
        gt=0.0,
        description="Correlation of a pyramid feature vector with itself; None keeps raw lengths",
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_source(self) -> "FeatureProviderConfig":
        """External features need a source directory."""
        if self.kind == FeatureKind.EXTERNAL and self.source_path is None:
            raise ValueError("external features require source_path")
        return self


class PipelineConfig(BaseModel):
    """Configuration for the iterative depth pipeline."""

    units: int = Field(default=3, ge=1, description="Number of boosting units N")
    layers_per_unit: int = Field(
        default=2,
        ge=1,
        description="Epipolar attention layers per unit M",
    )
    resolutions: list[int] = Field(
        default_factory=lambda: [64, 128, 256],
        description="Square working resolution of each unit",
    )
    candidates_per_unit: list[int] = Field(
        default_factory=lambda: [64, 32, 16],
        description="Depth candidates D of each unit",
    )
    near: float | None = Field(
        default=None,
        gt=0.0,
        description="Near depth (defaults to the scene's)",
    )
    far: float | None = Field(
        default=None,
        gt=0.0,
        description="Far depth (defaults to the scene's)",
    )
    spacing: DepthSpacing = Field(
        default=DepthSpacing.INVERSE_DEPTH,
        description="Spacing of the first unit's absolute candidates",
    )
    refine_radius: int = Field(
        default=1,
        ge=0,
        description="Box filter radius applied to correlation slices",
    )
    invalid_fill: float = Field(
        default=-1e4,
        description="Correlation value used for invalid samples before softmax",
    )
    sampling: SamplingMode = Field(
        default=SamplingMode.BILINEAR,
        description="Source sampling rule for warp indices",
    )
    feature_downsample: int = Field(
        default=1,
        ge=1,
        le=2,
        description="Feature grid coarsening relative to the unit resolution",
    )
    cache_warp_indices: bool = Field(
        default=True,
        description="Reuse warp indices across the layers of a unit",
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_schedule(self) -> "PipelineConfig":
        """Schedules must have one entry per unit and never shrink."""
        if len(self.resolutions) != self.units:
            raise ValueError(
                f"resolutions has {len(self.resolutions)} entries for {self.units} units"
            )
        if len(self.candidates_per_unit) != self.units:
            raise ValueError(
                f"candidates_per_unit has {len(self.candidates_per_unit)} entries "
                f"for {self.units} units"
            )
        if any(b < a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ValueError("resolutions must be non-decreasing")
        if any(r < 1 for r in self.resolutions):
            raise ValueError("resolutions must be positive")
        if any(d < 2 for d in self.candidates_per_unit):
            raise ValueError("every unit needs at least 2 depth candidates")
        if self.near is not None and self.far is not None and self.far <= self.near:
            raise ValueError("far must exceed near")
        return self

    def with_units(self, units: int) -> "PipelineConfig":
        """Derive a schedule for a different number of units.

        The first ``units`` entries are kept; extra units repeat the final
        resolution and candidate count, so a fourth unit iterates again at
        the largest resolution.
        """
        if units < 1:
            raise ValueError("units must be at least 1")

        def fit(values: list[int]) -> list[int]:
            return [values[min(i, len(values) - 1)] for i in range(units)]

        data = self.model_dump()
        data.update(
            units=units,
            resolutions=fit(self.resolutions),
            candidates_per_unit=fit(self.candidates_per_unit),
        )
        return PipelineConfig.model_validate(data)

    def with_range(self, near: float, far: float) -> "PipelineConfig":
        """Fill in the depth range where it was left unset."""
        data = self.model_dump()
        data["near"] = self.near if self.near is not None else near
        data["far"] = self.far if self.far is not None else far
        return PipelineConfig.model_validate(data)


class GfmConfig(BaseModel):
    """Configuration for the Gaussian focused module."""

    window: int = Field(default=16, ge=1, description="Window side length")
    heads: int = Field(default=6, ge=1, description="Attention heads")
    channels: int = Field(default=256, ge=1, description="Token channels C")
    retain_schedule: list[int] = Field(
        default_factory=lambda: [256, 256, 128, 128, 64, 64],
        description="Keys retained per query at each layer",
    )
    residual: bool = Field(
        default=True,
        description="Add each layer's output to its input",
    )
    shift_windows: bool = Field(
        default=True,
        description="Alternate window shifts of 0 and window/2",
    )
    seed: int = Field(default=0, ge=0, description="Seed for generated weights")

    model_config = {"extra": "forbid"}


class SplatConfig(BaseModel):
    """Configuration for Gaussian assembly and rasterization."""

    s_min: float = Field(default=1e-4, gt=0.0, description="Minimum splat scale")
    s_scale: float = Field(default=1.0, gt=0.0, description="Softplus scale gain")
    footprint_factor: float = Field(
        default=0.25,
        gt=0.0,
        description="Initial splat scale as a fraction of the pixel footprint",
    )
    opacity: float = Field(
        default=0.98,
        gt=0.0,
        lt=1.0,
        description="Initial splat opacity",
    )
    antialias: float = Field(
        default=0.3,
        ge=0.0,
        description="Screen-space covariance floor in square pixels",
    )

    model_config = {"extra": "forbid"}


class OutputConfig(BaseModel):
    """Configuration for report and artifact output."""

    format: ReportFormat = Field(
        default=ReportFormat.JSON,
        description="Primary report format",
    )
    dump_pfm: bool = Field(
        default=True,
        description="Write per-unit depth maps as PFM files",
    )
    include_timings: bool = Field(
        default=False,
        description="Embed wall-clock stage timings in reports",
    )

    model_config = {"extra": "forbid"}


class Settings(BaseModel):
    """Root configuration for WarpBoost."""

    features: FeatureProviderConfig = Field(default_factory=FeatureProviderConfig)
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    gfm: GfmConfig = Field(default_factory=GfmConfig)
    splat: SplatConfig = Field(default_factory=SplatConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    model_config = {"extra": "forbid"}

    @classmethod
    def load_from_file(cls, path: str | Path) -> "Settings":
        """Load settings from a YAML file.

        Args:
            path: Path to the configuration file.

        Returns:
            Loaded settings.

        Raises:
            FileNotFoundError: If file doesn't exist.
            ValueError: If YAML is invalid or doesn't match schema.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in configuration file: {e}") from e

        if data is None:
            # Empty file, use defaults
            return cls()

        if not isinstance(data, dict):
            raise ValueError(
                "Configuration file must contain a YAML mapping (key: value pairs). "
                "Run 'warpboost init' to generate a valid config template."
            )

        return cls.model_validate(data)

    def merge_with(self, overrides: dict[str, Any]) -> "Settings":
        """Create a new Settings with values from overrides.

        Args:
            overrides: Dictionary of override values.

        Returns:
            New Settings instance with merged values.
        """
        current = self.model_dump()
        pipeline = overrides.get("pipeline") or {}
        units = pipeline.get("units")
        if units is not None:
            # schedules not given alongside a unit count are reshaped to fit it
            fitted = self.pipeline.with_units(int(units))
            for key in ("resolutions", "candidates_per_unit"):
                if pipeline.get(key) is None:
                    current["pipeline"][key] = getattr(fitted, key)
        _deep_merge(current, overrides)
        return Settings.model_validate(current)


def _deep_merge(base: dict[str, Any], overrides: dict[str, Any]) -> None:
    """Recursively merge overrides into base dict in-place."""
    for key, value in overrides.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value)
        elif value is not None:  # Don't override with None
            base[key] = value


class ConfigLoader:
    """Loads configuration with proper precedence.

    Precedence (highest to lowest):
    1. CLI flags (passed as overrides)
    2. Environment variables (WARPBOOST_*)
    3. Project config file (./warpboost.yaml)
    4. User config file (~/.warpboost.yaml)
    5. Defaults
    """

    ENV_PREFIX = "WARPBOOST_"
    PROJECT_CONFIG_NAME = "warpboost.yaml"
    USER_CONFIG_NAME = ".warpboost.yaml"

    # Mapping of environment variables to config paths
    ENV_MAPPINGS = {
        "WARPBOOST_UNITS": ("pipeline", "units"),
        "WARPBOOST_LAYERS": ("pipeline", "layers_per_unit"),
        "WARPBOOST_SPACING": ("pipeline", "spacing"),
        "WARPBOOST_REFINE_RADIUS": ("pipeline", "refine_radius"),
        "WARPBOOST_CHANNELS": ("features", "channels"),
        "WARPBOOST_GFM_HEADS": ("gfm", "heads"),
        "WARPBOOST_OUTPUT_FORMAT": ("output", "format"),
    }

    def __init__(
        self,
        project_dir: Path | None = None,
        user_dir: Path | None = None,
    ) -> None:
        """Initialize the config loader.

        Args:
            project_dir: Directory to look for project config (default: cwd).
            user_dir: User's home directory (default: ~).
        """
        self.project_dir = project_dir or Path.cwd()
        self.user_dir = user_dir or Path.home()

    def load(self, cli_overrides: dict[str, Any] | None = None) -> Settings:
        """Load settings with full precedence chain.

        Args:
            cli_overrides: Overrides from CLI flags.

        Returns:
            Merged settings.
        """
        settings = Settings()

        user_config_path = self.user_dir / self.USER_CONFIG_NAME
        if user_config_path.exists():
            try:
                settings = Settings.load_from_file(user_config_path)
            except (ValueError, FileNotFoundError):
                pass  # Ignore invalid user config

        project_config_path = self.project_dir / self.PROJECT_CONFIG_NAME
        if project_config_path.exists():
            try:
                project_data = self._load_yaml(project_config_path)
                settings = settings.merge_with(project_data)
            except (ValueError, FileNotFoundError):
                pass  # Ignore invalid project config

        env_overrides = self._get_env_overrides()
        if env_overrides:
            settings = settings.merge_with(env_overrides)

        if cli_overrides:
            settings = settings.merge_with(cli_overrides)

        return settings

    def _load_yaml(self, path: Path) -> dict[str, Any]:
        """Load YAML file as dict."""
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
        return data if isinstance(data, dict) else {}

    def _get_env_overrides(self) -> dict[str, Any]:
        """Get configuration overrides from environment variables.

        Returns:
            Nested dictionary of overrides.
        """
        overrides: dict[str, Any] = {}

        for env_var, path in self.ENV_MAPPINGS.items():
            value = os.environ.get(env_var)
            if value is not None:
                self._set_nested(overrides, path, self._convert_value(value))

        return overrides

    def _set_nested(self, d: dict[str, Any], path: tuple[str, ...], value: Any) -> None:
        """Set a nested dictionary value."""
        for key in path[:-1]:
            d = d.setdefault(key, {})
        d[path[-1]] = value

    def _convert_value(self, value: str) -> Any:
        """Convert string value to appropriate type."""
        try:
            return int(value)
        except ValueError:
            pass

        try:
            return float(value)
        except ValueError:
            pass

        if value.lower() in ("true", "yes"):
            return True
        if value.lower() in ("false", "no"):
            return False

        return value


def load_settings(
    config_file: str | Path | None = None,
    cli_overrides: dict[str, Any] | None = None,
) -> Settings:
    """Convenience function to load settings.

    Args:
        config_file: Explicit config file path (optional).
        cli_overrides: Overrides from CLI.

    Returns:
        Loaded settings.
    """
    if config_file:
        settings = Settings.load_from_file(config_file)
        if cli_overrides:
            settings = settings.merge_with(cli_overrides)
        return settings

    loader = ConfigLoader()
    return loader.load(cli_overrides)


# Default settings instance
DEFAULT_SETTINGS = Settings()
