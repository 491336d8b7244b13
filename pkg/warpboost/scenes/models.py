"""Synthetic scene configuration."""

from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, model_validator


class SceneKind(str, Enum):
    """Geometry of a synthetic scene."""

    TEXTURED_PLANE = "textured_plane"  # One fronto-parallel plane
    BOX_ROOM = "box_room"  # Cameras inside an open-fronted box
    TWO_PLANES = "two_planes"  # Half-plane occluding a back plane


class TextureKind(str, Enum):
    """Surface texture painted on every face."""

    CHECKER = "checker"
    NOISE = "noise"
    GRADIENT_MIX = "gradient_mix"


class SceneConfig(BaseModel):
    """Everything needed to regenerate a synthetic scene bit for bit.

    Cameras share the identity rotation and sit on the x axis, centred on
    the origin and ``baseline`` apart. The focal length equals the image
    size, so the horizontal field of view is about 53 degrees.
    """

    kind: SceneKind = Field(default=SceneKind.TEXTURED_PLANE, description="Scene geometry")
    texture: TextureKind = Field(default=TextureKind.CHECKER, description="Surface texture")
    texture_seed: int = Field(default=0, ge=0, description="Seed for texture noise")
    texture_cycles: float = Field(
        default=8.0,
        gt=0,
        description="Texture periods across the image width at plane_depth",
    )
    plane_depth: float = Field(default=2.0, gt=0, description="Front plane depth")
    back_depth: float = Field(default=3.0, gt=0, description="Back plane depth (two_planes)")
    edge_x: float = Field(default=0.0, description="World x of the front plane's edge (two_planes)")
    room_half_width: float = Field(default=1.2, gt=0, description="Half width of the box room")
    room_half_height: float = Field(default=1.2, gt=0, description="Half height of the box room")
    room_depth: float = Field(default=3.0, gt=0, description="Depth of the box room's back wall")
    views: int = Field(default=2, ge=2, description="Number of cameras V")
    baseline: float = Field(default=0.1, gt=0, description="Distance between neighbouring cameras")
    image_size: int = Field(default=64, ge=8, description="Square image side in pixels")
    near: float = Field(default=1.0, gt=0, description="Near depth bound")
    far: float = Field(default=4.0, gt=0, description="Far depth bound")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_range(self) -> "SceneConfig":
        if self.near >= self.far:
            raise ValueError(f"near ({self.near}) must be below far ({self.far})")
        if self.kind == SceneKind.TWO_PLANES and self.back_depth <= self.plane_depth:
            raise ValueError("back_depth must exceed plane_depth for two_planes")
        return self

    @property
    def focal(self) -> float:
        return float(self.image_size)

    @property
    def texture_period(self) -> float:
        """Texture period in scene units."""
        return self.plane_depth * self.image_size / self.focal / self.texture_cycles


PRESETS: dict[str, dict[str, Any]] = {
    "plane": {
        "kind": SceneKind.TEXTURED_PLANE,
        "texture": TextureKind.CHECKER,
        "views": 3,
        "baseline": 0.2,
        "image_size": 256,
        "plane_depth": 2.0,
    },
    "two_planes": {
        "kind": SceneKind.TWO_PLANES,
        "texture": TextureKind.CHECKER,
        "views": 2,
        "baseline": 0.2,
        "image_size": 256,
        "plane_depth": 1.6,
        "back_depth": 2.6,
    },
    "box_room": {
        "kind": SceneKind.BOX_ROOM,
        "texture": TextureKind.GRADIENT_MIX,
        "views": 3,
        "baseline": 0.15,
        "image_size": 128,
        "plane_depth": 2.5,
    },
}


def preset_config(name: str, **overrides: Any) -> SceneConfig:
    """A bundled scene configuration, optionally with fields replaced.

    Raises:
        KeyError: If ``name`` is not a bundled preset.
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown scene preset '{name}'. Available: {', '.join(sorted(PRESETS))}")
    return SceneConfig(**{**PRESETS[name], **overrides})
