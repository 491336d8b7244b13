"""Synthetic multi-view scenes with analytic depth."""

from warpboost.scenes.generator import (
    SyntheticScene,
    cast_rays,
    covisibility_mask,
    covisible_with_any,
    generate_scene,
    scene_cameras,
)
from warpboost.scenes.io import export_scene, import_scene
from warpboost.scenes.models import PRESETS, SceneConfig, SceneKind, TextureKind, preset_config
from warpboost.scenes.textures import texture_rgb, value_noise

__all__ = [
    "PRESETS",
    "SceneConfig",
    "SceneKind",
    "SyntheticScene",
    "TextureKind",
    "cast_rays",
    "covisibility_mask",
    "covisible_with_any",
    "export_scene",
    "generate_scene",
    "import_scene",
    "preset_config",
    "scene_cameras",
    "texture_rgb",
    "value_noise",
]
