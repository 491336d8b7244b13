"""File formats, feature providers and seeded randomness."""

from warpboost.tensorio.features import (
    FeatureProvider,
    area_downsample,
    feature_file_name,
    pyramid_features,
)
from warpboost.tensorio.images import read_png, write_png
from warpboost.tensorio.pfm import read_pfm, write_pfm
from warpboost.tensorio.rng import Rng, rng_uniform
from warpboost.tensorio.tensor import (
    BoolArray,
    DoubleArray,
    FloatArray,
    IndexArray,
    load_tensor,
    save_tensor,
    validate_finite,
)

__all__ = [
    "BoolArray",
    "DoubleArray",
    "FeatureProvider",
    "FloatArray",
    "IndexArray",
    "Rng",
    "area_downsample",
    "feature_file_name",
    "load_tensor",
    "pyramid_features",
    "read_pfm",
    "read_png",
    "rng_uniform",
    "save_tensor",
    "validate_finite",
    "write_pfm",
    "write_png",
]
