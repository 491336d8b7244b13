"""Batch jobs behind the CLI subcommands."""

from warpboost.jobs.bench import random_stereo_pair, run_bench, run_trial
from warpboost.jobs.depth import run_depth_job, unit_error_stats
from warpboost.jobs.gfm_check import run_gfm_check, seeded_features
from warpboost.jobs.render import build_gaussians, run_render_job

__all__ = [
    "build_gaussians",
    "random_stereo_pair",
    "run_bench",
    "run_depth_job",
    "run_gfm_check",
    "run_render_job",
    "run_trial",
    "seeded_features",
    "unit_error_stats",
]
