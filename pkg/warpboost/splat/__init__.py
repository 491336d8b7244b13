"""Gaussian assembly, rasterization and image metrics."""

from warpboost.splat.gaussians import (
    GaussianSet,
    decode_gaussians,
    initial_raw_parameters,
    inverse_softplus,
    load_gaussians,
    save_gaussians,
    softplus,
)
from warpboost.splat.metrics import psnr, ssim
from warpboost.splat.raster import (
    RenderedImage,
    ScreenGaussians,
    project_covariance,
    rasterize,
)

__all__ = [
    "GaussianSet",
    "RenderedImage",
    "ScreenGaussians",
    "decode_gaussians",
    "initial_raw_parameters",
    "inverse_softplus",
    "load_gaussians",
    "project_covariance",
    "psnr",
    "rasterize",
    "save_gaussians",
    "softplus",
    "ssim",
]
