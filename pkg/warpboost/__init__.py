"""WarpBoost: iterative multi-view depth estimation and Gaussian splat rendering.

Depth is estimated unit by unit: each unit sweeps depth candidates through
sparse warp indices, turns feature correlations into per-pixel attention
over candidates and multiplies it into a running probability volume.
Pixel-aligned Gaussians placed at the estimated depth render novel views.
"""

__version__ = "0.1.0"
__author__ = "WarpBoost Contributors"

from warpboost.core.models import GfmCheckReport, RenderReport, RunReport

__all__ = [
    "__version__",
    "GfmCheckReport",
    "RenderReport",
    "RunReport",
]
