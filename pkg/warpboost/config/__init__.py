"""Configuration management for WarpBoost.

This module handles loading and validating configuration from files and environment.
"""

from warpboost.config.settings import (
    DEFAULT_SETTINGS,
    ConfigLoader,
    DepthSpacing,
    FeatureKind,
    FeatureProviderConfig,
    GfmConfig,
    OutputConfig,
    PipelineConfig,
    ReportFormat,
    SamplingMode,
    Settings,
    SplatConfig,
    load_settings,
)

__all__ = [
    "ConfigLoader",
    "DEFAULT_SETTINGS",
    "DepthSpacing",
    "FeatureKind",
    "FeatureProviderConfig",
    "GfmConfig",
    "OutputConfig",
    "PipelineConfig",
    "ReportFormat",
    "SamplingMode",
    "Settings",
    "SplatConfig",
    "load_settings",
]
