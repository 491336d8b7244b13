"""Pinhole cameras, depth candidates and warping."""

from warpboost.geometry.camera import (
    CameraView,
    Intrinsics,
    Pose,
    build_camera,
    camera_to_world,
    load_poses,
    pixel_rays,
    project_points,
    save_poses,
)
from warpboost.geometry.candidates import (
    CandidateMode,
    DepthHypothesisGrid,
    candidate_spacing_at,
    residual_candidates,
    sample_depth_candidates,
)
from warpboost.geometry.depth import (
    bilinear_resize,
    nearest_resize,
    resize_depth,
    unproject_depth,
)
from warpboost.geometry.warp import (
    WarpIndexMap,
    compute_warp_indices,
    dense_warp,
    dense_warp_with_validity,
    gather_features,
    project_candidates,
)

__all__ = [
    "CameraView",
    "CandidateMode",
    "DepthHypothesisGrid",
    "Intrinsics",
    "Pose",
    "WarpIndexMap",
    "bilinear_resize",
    "build_camera",
    "camera_to_world",
    "candidate_spacing_at",
    "compute_warp_indices",
    "dense_warp",
    "dense_warp_with_validity",
    "gather_features",
    "load_poses",
    "nearest_resize",
    "pixel_rays",
    "project_candidates",
    "project_points",
    "residual_candidates",
    "resize_depth",
    "sample_depth_candidates",
    "save_poses",
    "unproject_depth",
]
