"""Scene directories on disk.

Layout::

    scene.json            SceneConfig
    poses.json            one camera record per view
    images/view_00.png    8-bit RGB
    depth/view_00.pfm     float32 z-depth
"""

import json
import logging
from pathlib import Path

from warpboost.core.errors import MissingSceneFileError
from warpboost.geometry.camera import load_poses, save_poses
from warpboost.scenes.generator import SyntheticScene
from warpboost.scenes.models import SceneConfig
from warpboost.tensorio.images import read_png, write_png
from warpboost.tensorio.pfm import read_pfm, write_pfm

logger = logging.getLogger(__name__)

SCENE_FILE = "scene.json"
POSES_FILE = "poses.json"


def image_path(directory: Path, view: int) -> Path:
    return directory / "images" / f"view_{view:02d}.png"


def depth_path(directory: Path, view: int) -> Path:
    return directory / "depth" / f"view_{view:02d}.pfm"


def export_scene(scene: SyntheticScene, directory: str | Path) -> Path:
    """Write a scene directory, creating it if needed."""
    directory = Path(directory)
    (directory / "images").mkdir(parents=True, exist_ok=True)
    (directory / "depth").mkdir(parents=True, exist_ok=True)

    (directory / SCENE_FILE).write_text(scene.config.model_dump_json(indent=2), encoding="utf-8")
    save_poses(scene.cameras, directory / POSES_FILE)
    for i, (image, depth) in enumerate(zip(scene.images, scene.gt_depth)):
        write_png(image, image_path(directory, i))
        write_pfm(depth, depth_path(directory, i))

    logger.info(f"Exported {scene.views} views to {directory}")
    return directory


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingSceneFileError(f"Scene file not found: {path}")
    return path


def import_scene(directory: str | Path) -> SyntheticScene:
    """Read a scene directory written by :func:`export_scene`.

    Raises:
        MissingPosesError: If ``poses.json`` is absent.
        MissingSceneFileError: If the config, an image or a depth map is absent.
    """
    directory = Path(directory)
    cameras = load_poses(directory / POSES_FILE)
    config = SceneConfig.model_validate(
        json.loads(_require(directory / SCENE_FILE).read_text(encoding="utf-8"))
    )

    images = [read_png(_require(image_path(directory, i))) for i in range(len(cameras))]
    depths = [read_pfm(_require(depth_path(directory, i))) for i in range(len(cameras))]

    logger.debug(f"Imported {len(cameras)} views from {directory}")
    return SyntheticScene(config=config, images=images, cameras=cameras, gt_depth=depths)
