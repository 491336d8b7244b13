"""Tests for synthetic scene generation and scene directories."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from warpboost.core.errors import (
    GeometryOutsideRangeError,
    MissingPosesError,
    MissingSceneFileError,
    UnknownViewError,
)
from warpboost.scenes import (
    PRESETS,
    SceneConfig,
    SceneKind,
    TextureKind,
    covisibility_mask,
    covisible_with_any,
    export_scene,
    generate_scene,
    import_scene,
    preset_config,
    scene_cameras,
    texture_rgb,
    value_noise,
)


def plane(**overrides: object) -> SceneConfig:
    """32 px textured plane at depth 2 seen by two cameras 2 px of disparity apart."""
    values: dict[str, object] = {
        "kind": SceneKind.TEXTURED_PLANE,
        "texture": TextureKind.CHECKER,
        "views": 2,
        "baseline": 0.125,
        "image_size": 32,
        "plane_depth": 2.0,
    }
    values.update(overrides)
    return SceneConfig.model_validate(values)


class TestSceneConfig:
    """Tests for scene configuration."""

    def test_texture_period(self) -> None:
        """The period divides the visible plane width into the requested cycles."""
        cfg = SceneConfig(plane_depth=2.0, image_size=64, texture_cycles=8)
        assert cfg.focal == 64.0
        assert cfg.texture_period == pytest.approx(0.25)

    def test_near_must_be_below_far(self) -> None:
        """An empty depth range is rejected."""
        with pytest.raises(ValueError):
            SceneConfig(near=3.0, far=2.0)

    def test_two_planes_need_ordered_depths(self) -> None:
        """The back plane must lie behind the front one."""
        with pytest.raises(ValueError):
            SceneConfig(kind=SceneKind.TWO_PLANES, plane_depth=2.0, back_depth=1.5)

    def test_presets(self) -> None:
        """Presets load and accept overrides."""
        assert set(PRESETS) == {"plane", "two_planes", "box_room"}
        cfg = preset_config("box_room", image_size=32)
        assert cfg.kind == SceneKind.BOX_ROOM
        assert cfg.image_size == 32

    def test_unknown_preset(self) -> None:
        """Unknown presets name the available ones."""
        with pytest.raises(KeyError, match="plane"):
            preset_config("cathedral")


class TestGenerator:
    """Tests for ray-cast scene generation."""

    def test_cameras_straddle_origin(self) -> None:
        """Cameras sit on the x axis, baseline apart and centred on the origin."""
        cameras = scene_cameras(plane(views=3, baseline=0.2))

        centres = np.array([cam.pose.center for cam in cameras])
        np.testing.assert_allclose(centres[:, 0], [-0.2, 0.0, 0.2], atol=1e-12)
        np.testing.assert_allclose(centres[:, 1:], 0.0)
        assert cameras[0].intrinsics.cx == 16.0

    def test_plane_depth_is_constant(self) -> None:
        """Every pixel of a fronto-parallel plane has the plane's z-depth."""
        scene = generate_scene(plane())

        assert scene.views == 2
        for depth in scene.gt_depth:
            assert depth.shape == (32, 32)
            np.testing.assert_allclose(depth, 2.0, rtol=1e-6)

    def test_views_agree_on_surface_colour(self) -> None:
        """A surface point has one colour in every view."""
        scene = generate_scene(plane())

        # disparity = 32 * 0.125 / 2 = 2 px
        np.testing.assert_allclose(scene.images[1][:, :-2], scene.images[0][:, 2:], atol=1e-5)

    def test_images_are_in_unit_range(self) -> None:
        """Colours stay within [0, 1] for every texture."""
        for texture in TextureKind:
            scene = generate_scene(plane(texture=texture))
            for image in scene.images:
                assert image.dtype == np.float32
                assert image.min() >= 0.0
                assert image.max() <= 1.0

    def test_generation_is_deterministic(self) -> None:
        """The same config gives the same pixels."""
        a = generate_scene(plane(texture=TextureKind.NOISE))
        b = generate_scene(plane(texture=TextureKind.NOISE))
        c = generate_scene(plane(texture=TextureKind.NOISE, texture_seed=5))

        np.testing.assert_array_equal(a.images[0], b.images[0])
        assert not np.array_equal(a.images[0], c.images[0])

    def test_two_planes_depths(self) -> None:
        """Pixels see either the front half-plane or the back plane."""
        cfg = SceneConfig(kind=SceneKind.TWO_PLANES, plane_depth=1.6, back_depth=2.6, image_size=32)
        scene = generate_scene(cfg)

        values = np.unique(np.round(scene.gt_depth[0], 4))
        np.testing.assert_allclose(values, [1.6, 2.6], rtol=1e-5)
        # the front plane covers negative x
        assert np.all(np.isclose(scene.gt_depth[0][:, 0], 1.6))
        assert np.all(np.isclose(scene.gt_depth[0][:, -1], 2.6))

    def test_box_room_stays_in_range(self) -> None:
        """Walls and back wall all lie within the depth range."""
        scene = generate_scene(preset_config("box_room", image_size=32))

        for depth in scene.gt_depth:
            assert depth.min() >= scene.config.near
            assert depth.max() <= scene.config.room_depth + 1e-5
            assert depth.min() < scene.config.room_depth

    def test_depth_outside_range(self) -> None:
        """A plane beyond the far bound is refused."""
        with pytest.raises(GeometryOutsideRangeError):
            generate_scene(plane(plane_depth=5.0))

    def test_check_view(self) -> None:
        """View indices are bounded by the scene."""
        scene = generate_scene(plane())
        scene.check_view(1)
        with pytest.raises(UnknownViewError):
            scene.check_view(2)


class TestCovisibility:
    """Tests for covisibility masks."""

    def test_plane_loses_only_the_border(self) -> None:
        """On a plane the first 2 columns of view 0 leave view 1's frustum."""
        scene = generate_scene(plane())

        mask = covisibility_mask(scene, 0, 1)

        assert not mask[:, :2].any()
        assert mask[:, 2:].all()
        np.testing.assert_array_equal(covisible_with_any(scene, 0), mask)

    def test_occluded_back_plane(self) -> None:
        """Back-plane points hidden behind the front plane in the other view are excluded."""
        cfg = SceneConfig(
            kind=SceneKind.TWO_PLANES,
            plane_depth=1.6,
            back_depth=2.6,
            views=2,
            baseline=0.2,
            image_size=64,
        )
        scene = generate_scene(cfg)

        mask = covisibility_mask(scene, 1, 0)

        # column 29 of view 1 sees the back plane just right of the edge,
        # which view 0 sees covered by the front plane
        assert np.isclose(scene.gt_depth[1][0, 29], 2.6)
        assert not mask[:, 29].any()
        assert mask[:, 45].all()


class TestTextures:
    """Tests for procedural textures."""

    def test_value_noise_range(self) -> None:
        """Noise stays in [0, 1)."""
        u, v = np.meshgrid(np.linspace(-3, 3, 50), np.linspace(-3, 3, 50))
        noise = value_noise(u, v, 0.3, seed=2)

        assert noise.min() >= 0.0
        assert noise.max() < 1.0

    def test_noise_interpolates_lattice(self) -> None:
        """Noise is continuous across cell boundaries."""
        u = np.array([0.9999999, 1.0])
        noise = value_noise(u, np.zeros(2), 1.0, seed=3)
        assert noise[0] == pytest.approx(noise[1], abs=1e-5)

    def test_texture_shape(self) -> None:
        """Textures return three channels per point."""
        rgb = texture_rgb(TextureKind.GRADIENT_MIX, np.zeros((4, 5)), np.zeros((4, 5)), 0.5, seed=0)
        assert rgb.shape == (4, 5, 3)


class TestSceneDirectory:
    """Tests for exporting and importing scenes."""

    def setup_method(self) -> None:
        self.tmpdir = Path(tempfile.mkdtemp())

    def teardown_method(self) -> None:
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def test_export_and_import(self) -> None:
        """A scene survives its directory, images to 8-bit precision."""
        scene = generate_scene(plane(views=3))

        export_scene(scene, self.tmpdir)
        loaded = import_scene(self.tmpdir)

        assert (self.tmpdir / "scene.json").exists()
        assert (self.tmpdir / "images" / "view_02.png").exists()
        assert loaded.config == scene.config
        assert loaded.views == 3
        for a, b in zip(loaded.images, scene.images):
            np.testing.assert_allclose(a, b, atol=0.5 / 255 + 1e-6)
        for a, b in zip(loaded.gt_depth, scene.gt_depth):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(loaded.cameras, scene.cameras):
            np.testing.assert_allclose(a.pose.center, b.pose.center)

    def test_missing_poses(self) -> None:
        """A directory without poses is not a scene."""
        export_scene(generate_scene(plane()), self.tmpdir)
        (self.tmpdir / "poses.json").unlink()

        with pytest.raises(MissingPosesError):
            import_scene(self.tmpdir)

    def test_missing_image(self) -> None:
        """Every view needs its image."""
        export_scene(generate_scene(plane()), self.tmpdir)
        (self.tmpdir / "images" / "view_01.png").unlink()

        with pytest.raises(MissingSceneFileError):
            import_scene(self.tmpdir)
