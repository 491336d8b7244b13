"""Tests for Gaussian assembly, rasterization and image metrics."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from warpboost.config import Settings, SplatConfig
from warpboost.core.errors import InsufficientChannelsError, ShapeMismatchError
from warpboost.core.models import DepthSource
from warpboost.geometry import CameraView, Intrinsics, Pose, build_camera
from warpboost.jobs import build_gaussians
from warpboost.scenes import SceneConfig, SyntheticScene, TextureKind, generate_scene
from warpboost.splat import (
    GaussianSet,
    decode_gaussians,
    initial_raw_parameters,
    inverse_softplus,
    load_gaussians,
    project_covariance,
    psnr,
    rasterize,
    save_gaussians,
    softplus,
    ssim,
)


def centred_camera(size: int = 4, focal: float = 4.0) -> CameraView:
    """Camera whose optical axis passes through the centre of pixel (1, 1)."""
    return build_camera(
        Intrinsics(fx=focal, fy=focal, cx=1.5, cy=1.5, width=size, height=size), Pose.identity()
    )


def splats(
    means: list[list[float]],
    opacities: list[float],
    colors: list[list[float]],
    scale: float = 0.01,
) -> GaussianSet:
    """Isotropic, unrotated splats."""
    n = len(means)
    rotations = np.zeros((n, 4))
    rotations[:, 0] = 1.0
    return GaussianSet(
        means=np.array(means, dtype=np.float64),
        opacities=np.array(opacities, dtype=np.float64),
        scales=np.full((n, 3), scale),
        rotations=rotations,
        colors=np.array(colors, dtype=np.float64),
    )


class TestDecode:
    """Tests for turning raw parameter maps into Gaussians."""

    def test_zero_activations(self) -> None:
        """Zeros give opacity 0.5, scale s_min + ln 2 and the identity rotation."""
        cam = centred_camera()
        depth = np.full((4, 4), 2.0)
        colors = np.random.default_rng(0).random((4, 4, 3))

        gaussians = decode_gaussians(np.zeros((4, 4, 8)), depth, cam, colors)

        assert len(gaussians) == 16
        np.testing.assert_allclose(gaussians.opacities, 0.5)
        np.testing.assert_allclose(gaussians.scales, 1e-4 + np.log(2.0))
        np.testing.assert_array_equal(gaussians.rotations, np.tile([1.0, 0.0, 0.0, 0.0], (16, 1)))
        np.testing.assert_allclose(gaussians.colors, colors.reshape(-1, 3))
        np.testing.assert_allclose(gaussians.means[:, 2], 2.0)

    def test_quaternions_are_normalised(self) -> None:
        """Raw quaternions are scaled to unit length."""
        raw = np.zeros((4, 4, 8))
        raw[..., 3:7] = [0.0, 0.0, 3.0, 4.0]
        raw[0, 0, 3:7] = 0.0

        gaussians = decode_gaussians(raw, np.ones((4, 4)), centred_camera(), np.zeros((4, 4, 3)))

        np.testing.assert_allclose(gaussians.rotations[1], [0.0, 0.0, 0.6, 0.8])
        # degenerate quaternions fall back to the identity
        np.testing.assert_array_equal(gaussians.rotations[0], [1.0, 0.0, 0.0, 0.0])

    def test_extra_channels_are_ignored(self) -> None:
        """Channels past the eighth do not matter."""
        cam = centred_camera()
        depth = np.full((4, 4), 2.0)
        raw = np.random.default_rng(1).standard_normal((4, 4, 10))
        colors = np.zeros((4, 4, 3))

        a = decode_gaussians(raw, depth, cam, colors)
        b = decode_gaussians(raw[..., :8], depth, cam, colors)

        np.testing.assert_array_equal(a.scales, b.scales)
        np.testing.assert_array_equal(a.rotations, b.rotations)

    def test_too_few_channels(self) -> None:
        """Seven channels cannot describe a Gaussian."""
        with pytest.raises(InsufficientChannelsError):
            decode_gaussians(np.zeros((4, 4, 7)), np.ones((4, 4)), centred_camera(), np.zeros((4, 4, 3)))

    def test_initial_parameters_hit_footprint(self) -> None:
        """Initial splats are a fixed fraction of the pixel footprint."""
        cam = centred_camera(focal=8.0)
        depth = np.full((4, 4), 2.0)
        cfg = SplatConfig(footprint_factor=0.5, opacity=0.9)

        gaussians = decode_gaussians(initial_raw_parameters(depth, cam, cfg), depth, cam, np.zeros((4, 4, 3)), cfg)

        np.testing.assert_allclose(gaussians.scales, 0.5 * 2.0 / 8.0, rtol=1e-9)
        np.testing.assert_allclose(gaussians.opacities, 0.9, rtol=1e-9)

    def test_softplus_inverse(self) -> None:
        """inverse_softplus undoes softplus."""
        y = np.array([1e-4, 0.5, 3.0])
        np.testing.assert_allclose(softplus(inverse_softplus(y)), y, rtol=1e-9)


class TestGaussianSet:
    """Tests for the Gaussian container."""

    def test_field_shapes_are_checked(self) -> None:
        """Every field needs one row per Gaussian."""
        with pytest.raises(ShapeMismatchError):
            GaussianSet(
                means=np.zeros((2, 3)),
                opacities=np.zeros(3),
                scales=np.zeros((2, 3)),
                rotations=np.zeros((2, 4)),
                colors=np.zeros((2, 3)),
            )

    def test_concat_keeps_order(self) -> None:
        """Concatenation follows list order."""
        a = splats([[0, 0, 1]], [0.1], [[1, 0, 0]])
        b = splats([[0, 0, 2], [0, 0, 3]], [0.2, 0.3], [[0, 1, 0], [0, 0, 1]])

        joined = GaussianSet.concat([a, b])

        assert len(joined) == 3
        np.testing.assert_allclose(joined.opacities, [0.1, 0.2, 0.3])
        assert len(GaussianSet.concat([])) == 0

    def test_covariance_of_rotated_splat(self) -> None:
        """Covariance is R diag(s²) Rᵀ."""
        gaussians = splats([[0, 0, 1]], [1.0], [[0, 0, 0]])
        gaussians = GaussianSet(
            means=gaussians.means,
            opacities=gaussians.opacities,
            scales=np.array([[2.0, 1.0, 1.0]]),
            # 90 degrees about z
            rotations=np.array([[np.sqrt(0.5), 0.0, 0.0, np.sqrt(0.5)]]),
            colors=gaussians.colors,
        )

        np.testing.assert_allclose(gaussians.covariances()[0], np.diag([1.0, 4.0, 1.0]), atol=1e-12)

    def test_save_and_load(self) -> None:
        """Sets survive a bundle on disk."""
        original = splats([[0.1, 0.2, 1.5], [0.0, 0.0, 2.0]], [0.4, 0.6], [[1, 0, 0], [0, 1, 0]])

        with tempfile.TemporaryDirectory() as tmpdir:
            save_gaussians(original, tmpdir)
            loaded = load_gaussians(tmpdir)

        assert len(loaded) == 2
        np.testing.assert_allclose(loaded.means, original.means, rtol=1e-6)
        np.testing.assert_allclose(loaded.opacities, original.opacities, rtol=1e-6)

    def test_missing_bundle(self) -> None:
        """A directory without a manifest is not a bundle."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(FileNotFoundError):
                load_gaussians(tmpdir)


class TestRasterize:
    """Tests for splat rasterization."""

    def test_screen_covariance_on_axis(self) -> None:
        """An isotropic splat on the axis projects to (f s / z)² + antialias."""
        screen = project_covariance(splats([[0, 0, 2]], [1.0], [[1, 1, 1]], scale=0.5), centred_camera(), 0.3)

        np.testing.assert_allclose(screen.means[0], [1.5, 1.5])
        np.testing.assert_allclose(screen.covariances[0], np.eye(2) * (1.0 + 0.3))
        assert screen.depths[0] == 2.0

    def test_splats_behind_camera_are_dropped(self) -> None:
        """Only splats in front of the camera are projected."""
        screen = project_covariance(splats([[0, 0, -1], [0, 0, 1]], [1.0, 1.0], [[0, 0, 0]] * 2), centred_camera())

        assert len(screen) == 1
        assert screen.ids[0] == 1

    def test_single_splat_centre(self) -> None:
        """At its own centre a splat contributes opacity times colour."""
        image = rasterize(splats([[0, 0, 2]], [0.8], [[0.5, 1.0, 0.25]]), centred_camera(), 4, 4)

        np.testing.assert_allclose(image.color[1, 1], [0.4, 0.8, 0.2], rtol=1e-6)
        assert image.alpha[1, 1] == pytest.approx(0.8)

    def test_front_to_back_compositing(self) -> None:
        """The nearer splat is composited first regardless of list order."""
        far_green = [[0, 0, 3]], [0.5], [[0.0, 1.0, 0.0]]
        near_red = [[0, 0, 1]], [0.5], [[1.0, 0.0, 0.0]]
        gaussians = GaussianSet.concat([splats(*far_green), splats(*near_red)])

        image = rasterize(gaussians, centred_camera(), 4, 4, antialias=0.1)

        np.testing.assert_allclose(image.color[1, 1], [0.5, 0.25, 0.0], rtol=1e-6)
        assert image.alpha[1, 1] == pytest.approx(0.75)

    def test_equal_depths_draw_in_index_order(self) -> None:
        """Ties in depth go to the smaller index."""
        gaussians = splats([[0, 0, 2], [0, 0, 2]], [0.5, 0.5], [[1, 0, 0], [0, 0, 1]])

        image = rasterize(gaussians, centred_camera(), 4, 4, antialias=0.1)

        np.testing.assert_allclose(image.color[1, 1], [0.5, 0.0, 0.25], rtol=1e-6)

    def test_empty_set_renders_black(self) -> None:
        """No splats, no colour."""
        image = rasterize(GaussianSet.empty(), centred_camera(), 4, 4)

        assert image.color.shape == (4, 4, 3)
        assert np.all(image.color == 0.0)
        assert np.all(image.alpha == 0.0)

    def test_pixels_outside_the_footprint_are_untouched(self) -> None:
        """Small splats leave distant pixels empty."""
        image = rasterize(splats([[0, 0, 2]], [0.99], [[1, 1, 1]]), centred_camera(8), 8, 8)

        assert np.all(image.alpha[5:, :] == 0.0)
        assert np.all(image.alpha[:, 5:] == 0.0)

    def test_near_camera_splat_is_clipped_to_the_image(self) -> None:
        """A splat just in front of the lens covers the image without a full-footprint box."""
        camera = build_camera(
            Intrinsics(fx=64.0, fy=64.0, cx=32.0, cy=32.0, width=64, height=64), Pose.identity()
        )
        near = splats([[0, 0, 0.01]], [0.5], [[1.0, 0.5, 0.0]], scale=0.3)

        image = rasterize(near, camera, 64, 64)

        np.testing.assert_allclose(image.alpha, 0.5, rtol=1e-3)
        np.testing.assert_allclose(image.color[..., 1], 0.25, rtol=1e-3)

    def test_off_screen_splat_contributes_nothing(self) -> None:
        """A splat whose box lies past the image edge is skipped."""
        camera = build_camera(
            Intrinsics(fx=64.0, fy=64.0, cx=32.0, cy=32.0, width=64, height=64), Pose.identity()
        )

        image = rasterize(splats([[1, 0, 1]], [0.9], [[1, 1, 1]]), camera, 64, 64)

        assert np.all(image.alpha == 0.0)


class TestMetrics:
    """Tests for PSNR and SSIM."""

    def test_identical_images(self) -> None:
        """Identical images hit the PSNR cap and SSIM 1."""
        image = np.random.default_rng(0).random((16, 16, 3))

        assert psnr(image, image) == 99.0
        assert ssim(image, image) == pytest.approx(1.0)

    def test_psnr_of_constant_offsets(self) -> None:
        """MSE 0.25 gives about 6.02 dB; MSE 0.01 gives 20 dB."""
        zeros = np.zeros((4, 4, 3))

        assert psnr(zeros, np.full((4, 4, 3), 0.5)) == pytest.approx(6.0206, abs=1e-4)
        assert psnr(zeros, np.full((4, 4, 3), 0.1)) == pytest.approx(20.0)

    def test_ssim_drops_with_noise(self) -> None:
        """Noise lowers SSIM."""
        rng = np.random.default_rng(1)
        image = rng.random((32, 32, 3))
        noisy = np.clip(image + rng.normal(0, 0.2, image.shape), 0, 1)

        assert ssim(image, noisy) < 0.9

    def test_shape_mismatch(self) -> None:
        """Metrics compare images of one shape."""
        with pytest.raises(ShapeMismatchError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

    def test_ssim_needs_eleven_pixels(self) -> None:
        """The SSIM window must fit the image."""
        with pytest.raises(ShapeMismatchError):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))


@pytest.fixture(scope="module")
def scene() -> SyntheticScene:
    """A 64 pixel noise-textured plane seen by three cameras."""
    return generate_scene(
        SceneConfig(texture=TextureKind.NOISE, texture_cycles=4, views=3, image_size=64)
    )


class TestSceneRendering:
    """Rendering synthetic scenes from ground-truth depth."""

    def test_self_render(self, scene: SyntheticScene) -> None:
        """A view rendered from its own tight splats reproduces its image."""
        settings = Settings.model_validate({"splat": {"footprint_factor": 0.1, "antialias": 0.05, "opacity": 0.999}})
        gaussians = build_gaussians(scene, [0], settings, DepthSource.GT, Path(tempfile.gettempdir()))

        image = rasterize(gaussians, scene.cameras[0], 64, 64, settings.splat.antialias)

        assert psnr(image.color, scene.images[0]) >= 35.0

    def test_held_out_view(self, scene: SyntheticScene) -> None:
        """The middle view rendered from its neighbours is fully covered and close."""
        settings = Settings()
        gaussians = build_gaussians(scene, [0, 2], settings, DepthSource.GT, Path(tempfile.gettempdir()))

        image = rasterize(gaussians, scene.cameras[1], 64, 64, settings.splat.antialias)

        assert image.alpha.min() > 0.9
        assert psnr(image.color, scene.images[1]) >= 20.0
