"""Tests for file formats, feature maps and seeded randomness.

This module tests:
- TNSR save/load and its error cases
- PFM depth maps and PNG images
- Pyramid features and the feature provider
- Reproducible random streams
"""

import struct
import tempfile
from pathlib import Path

import numpy as np
import pytest

from warpboost.config import FeatureKind, FeatureProviderConfig
from warpboost.core.errors import (
    BadMagicError,
    FeatureScaleError,
    InvalidDrawCountError,
    FeatureSourceError,
    MalformedHeaderError,
    NonFiniteTensorError,
    ShapeMismatchError,
    TooManyDimensionsError,
    TruncatedPayloadError,
    UnsupportedChannelsError,
    UnsupportedVersionError,
)
from warpboost.tensorio import (
    FeatureProvider,
    Rng,
    area_downsample,
    feature_file_name,
    load_tensor,
    pyramid_features,
    read_pfm,
    read_png,
    rng_uniform,
    save_tensor,
    validate_finite,
    write_pfm,
    write_png,
)


class TestTensorFiles:
    """Tests for the TNSR format."""

    def test_round_trip_keeps_shape_and_bits(self) -> None:
        """Saved arrays load back bit-exactly, NaN included."""
        array = np.arange(24, dtype=np.float32).reshape(2, 3, 4) / 7.0
        array[1, 2, 3] = np.nan

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "a.tnsr"
            save_tensor(array, path)
            loaded = load_tensor(path)

        assert loaded.shape == (2, 3, 4)
        assert loaded.dtype == np.float32
        assert loaded.tobytes() == array.tobytes()

    def test_header_layout(self) -> None:
        """Header is magic, version, ndim, then u64 dims."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "a.tnsr"
            save_tensor(np.zeros((2, 5), dtype=np.float32), path)
            data = path.read_bytes()

        assert data[:4] == b"TNSR"
        assert struct.unpack_from("<II", data, 4) == (1, 2)
        assert struct.unpack_from("<2Q", data, 12) == (2, 5)
        assert len(data) == 12 + 16 + 4 * 10

    def test_bad_magic(self) -> None:
        """Files without the magic are rejected."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "bad.tnsr"
            path.write_bytes(b"NOPE" + bytes(16))
            with pytest.raises(BadMagicError):
                load_tensor(path)

    def test_truncated_payload(self) -> None:
        """A payload shorter than the shape declares is rejected."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "short.tnsr"
            save_tensor(np.ones((4, 4), dtype=np.float32), path)
            path.write_bytes(path.read_bytes()[:-4])
            with pytest.raises(TruncatedPayloadError):
                load_tensor(path)

    def test_unsupported_version(self) -> None:
        """Only version 1 is understood."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "v2.tnsr"
            path.write_bytes(b"TNSR" + struct.pack("<II", 2, 0) + bytes(4))
            with pytest.raises(UnsupportedVersionError):
                load_tensor(path)

    def test_too_many_dimensions_on_save(self) -> None:
        """Nine dimensions exceed the format."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(TooManyDimensionsError):
                save_tensor(np.zeros((1,) * 9, dtype=np.float32), Path(tmpdir) / "x.tnsr")

    def test_too_many_dimensions_on_load(self) -> None:
        """A header declaring nine dimensions is rejected."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "x.tnsr"
            path.write_bytes(b"TNSR" + struct.pack("<II", 1, 9) + struct.pack("<9Q", *([1] * 9)))
            with pytest.raises(TooManyDimensionsError):
                load_tensor(path)

    def test_validate_finite(self) -> None:
        """Non-finite values are reported by count."""
        validate_finite(np.ones(3, dtype=np.float32))
        with pytest.raises(NonFiniteTensorError, match="2 non-finite"):
            validate_finite(np.array([np.nan, 1.0, np.inf], dtype=np.float32))


class TestPfm:
    """Tests for Portable Float Map depth files."""

    def test_round_trip_keeps_orientation(self) -> None:
        """Row 0 of the array is row 0 after a round trip."""
        depth = np.arange(12, dtype=np.float32).reshape(3, 4) + 1.0

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "d.pfm"
            write_pfm(depth, path)
            raw = path.read_bytes()
            loaded = read_pfm(path)

        assert raw.startswith(b"Pf\n4 3\n-1.0\n")
        np.testing.assert_array_equal(loaded, depth)

    def test_raster_is_stored_bottom_up(self) -> None:
        """The first stored row is the bottom image row."""
        depth = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "d.pfm"
            write_pfm(depth, path)
            raw = path.read_bytes()

        header = b"Pf\n2 2\n-1.0\n"
        first_row = np.frombuffer(raw[len(header) : len(header) + 8], dtype="<f4")
        np.testing.assert_array_equal(first_row, [3.0, 4.0])

    def test_colour_pfm_rejected(self) -> None:
        """Colour maps are not supported."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "c.pfm"
            path.write_bytes(b"PF\n1 1\n-1.0\n" + bytes(12))
            with pytest.raises(UnsupportedChannelsError):
                read_pfm(path)

    def test_unknown_tag_rejected(self) -> None:
        """Anything other than Pf or PF is malformed."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "x.pfm"
            path.write_bytes(b"P6\n1 1\n255\n" + bytes(3))
            with pytest.raises(MalformedHeaderError):
                read_pfm(path)

    def test_short_raster_rejected(self) -> None:
        """A raster shorter than width*height floats is malformed."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "x.pfm"
            path.write_bytes(b"Pf\n2 2\n-1.0\n" + bytes(8))
            with pytest.raises(MalformedHeaderError):
                read_pfm(path)

    def test_write_requires_two_dimensions(self) -> None:
        """Only [H, W] maps can be written."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ShapeMismatchError):
                write_pfm(np.zeros((2, 2, 1), dtype=np.float32), Path(tmpdir) / "x.pfm")


class TestPng:
    """Tests for 8-bit PNG images."""

    def test_round_trip_within_quantisation(self) -> None:
        """Values come back within half a code step."""
        image = np.random.default_rng(3).random((5, 7, 3)).astype(np.float32)

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "i.png"
            write_png(image, path)
            loaded = read_png(path)

        assert loaded.shape == (5, 7, 3)
        assert np.max(np.abs(loaded - image)) <= 0.5 / 255.0 + 1e-6

    def test_out_of_range_values_are_clipped(self) -> None:
        """Values outside [0, 1] saturate."""
        image = np.full((2, 2, 3), 1.7, dtype=np.float32)
        image[0, 0] = -0.4

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "i.png"
            write_png(image, path)
            loaded = read_png(path)

        assert loaded[0, 0, 0] == 0.0
        assert loaded[1, 1, 2] == 1.0

    def test_rejects_non_rgb(self) -> None:
        """Images must carry three channels."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ShapeMismatchError):
                write_png(np.zeros((2, 2), dtype=np.float32), Path(tmpdir) / "i.png")


def checkerboard(size: int, cell: int) -> np.ndarray:
    """Grey checkerboard as an RGB image."""
    yy, xx = np.mgrid[0:size, 0:size]
    board = ((yy // cell + xx // cell) % 2).astype(np.float32)
    return np.repeat(board[..., None], 3, axis=2)


class TestFeatures:
    """Tests for pyramid features."""

    def test_area_downsample_averages_blocks(self) -> None:
        """Each output pixel is the mean of its block."""
        array = np.arange(16, dtype=np.float32).reshape(4, 4)
        out = area_downsample(array, 2)
        np.testing.assert_allclose(out, [[2.5, 4.5], [10.5, 12.5]])

    def test_area_downsample_requires_divisor(self) -> None:
        """Scales that do not divide the image are rejected."""
        with pytest.raises(FeatureScaleError):
            area_downsample(np.zeros((6, 6)), 4)

    def test_unsupported_scale(self) -> None:
        """Only scales 1, 2 and 4 are supported."""
        with pytest.raises(FeatureScaleError):
            pyramid_features(np.zeros((24, 24, 3), dtype=np.float32), FeatureProviderConfig(), 3)

    def test_shape_follows_scale_and_channels(self) -> None:
        """Output is [H/scale, W/scale, C]."""
        image = checkerboard(16, 2)
        cfg = FeatureProviderConfig(channels=24)

        assert pyramid_features(image, cfg, 1).shape == (16, 16, 24)
        assert pyramid_features(image, cfg, 4).shape == (4, 4, 24)

    def test_gradient_channels_on_checkerboard(self) -> None:
        """Gradients are central differences of the averaged grey image."""
        image = checkerboard(8, 2)
        cfg = FeatureProviderConfig(channels=8, standardize=False, match_logit=None)

        features = pyramid_features(image, cfg, 2)

        # averaged image rows alternate [0, 1, 0, 1] and [1, 0, 1, 0]
        expected_x = np.array([[1, 0, 0, 1], [-1, 0, 0, -1]] * 2, dtype=np.float32)
        expected_y = expected_x.T
        np.testing.assert_allclose(features[:, :, 3], expected_x, atol=1e-6)
        np.testing.assert_allclose(features[:, :, 4], expected_y, atol=1e-6)
        np.testing.assert_allclose(features[:, :, 0], features[:, :, 0].round())

    def test_standardized_channels(self) -> None:
        """Standardised channels have zero mean and unit variance."""
        image = np.random.default_rng(0).random((16, 16, 3)).astype(np.float32)
        features = pyramid_features(image, FeatureProviderConfig(channels=15, match_logit=None), 1)

        np.testing.assert_allclose(features.mean(axis=(0, 1)), 0.0, atol=1e-5)
        np.testing.assert_allclose(features.std(axis=(0, 1)), 1.0, atol=1e-4)

    def test_extra_channels_are_zero(self) -> None:
        """Channels past the recipe are zero padding."""
        image = np.random.default_rng(1).random((8, 8, 3)).astype(np.float32)
        features = pyramid_features(image, FeatureProviderConfig(channels=20), 1)

        assert np.all(features[:, :, 15:] == 0.0)

    def test_self_correlation_equals_match_logit(self) -> None:
        """Every pixel correlates with itself at match_logit, whatever C is."""
        image = np.random.default_rng(3).random((8, 8, 3)).astype(np.float32)
        for channels in (8, 64):
            features = pyramid_features(image, FeatureProviderConfig(channels=channels), 1)

            self_corr = (features.astype(np.float64) ** 2).sum(axis=2) / np.sqrt(channels)
            np.testing.assert_allclose(self_corr, 96.0, rtol=1e-5)

    def test_constant_image_gives_zero_features(self) -> None:
        """A featureless image has nothing to rescale."""
        image = np.full((8, 8, 3), 0.4, dtype=np.float32)
        features = pyramid_features(image, FeatureProviderConfig(channels=16, match_logit=10.0), 1)

        assert np.all(features == 0.0)

    def test_features_are_deterministic(self) -> None:
        """Same image and config give identical features."""
        image = np.random.default_rng(2).random((8, 8, 3)).astype(np.float32)
        cfg = FeatureProviderConfig(channels=16)

        np.testing.assert_array_equal(
            pyramid_features(image, cfg, 2), pyramid_features(image.copy(), cfg, 2)
        )


class TestFeatureProvider:
    """Tests for the feature provider."""

    def test_memoises_per_view_and_scale(self) -> None:
        """Repeated requests return the cached array."""
        provider = FeatureProvider(FeatureProviderConfig(channels=8))
        image = checkerboard(8, 2)

        first = provider.features(0, image, 2)
        assert provider.features(0, image, 2) is first
        assert provider.features(0, image, 1) is not first

        provider.clear()
        assert provider.features(0, image, 2) is not first

    def test_external_features_loaded(self) -> None:
        """External features are read from TNSR files."""
        with tempfile.TemporaryDirectory() as tmpdir:
            stored = np.full((4, 4, 3), 0.25, dtype=np.float32)
            save_tensor(stored, Path(tmpdir) / feature_file_name(1, 2))
            cfg = FeatureProviderConfig(
                kind=FeatureKind.EXTERNAL, channels=3, source_path=Path(tmpdir)
            )

            loaded = FeatureProvider(cfg).features(1, np.zeros((8, 8, 3), dtype=np.float32), 2)

        np.testing.assert_array_equal(loaded, stored)

    def test_external_missing_file(self) -> None:
        """A missing feature file is an error."""
        with tempfile.TemporaryDirectory() as tmpdir:
            cfg = FeatureProviderConfig(
                kind=FeatureKind.EXTERNAL, channels=3, source_path=Path(tmpdir)
            )
            with pytest.raises(FeatureSourceError, match="not found"):
                FeatureProvider(cfg).features(0, np.zeros((8, 8, 3), dtype=np.float32), 1)

    def test_external_wrong_shape(self) -> None:
        """Stored features must match the expected grid and channels."""
        with tempfile.TemporaryDirectory() as tmpdir:
            save_tensor(np.zeros((8, 8, 5), dtype=np.float32), Path(tmpdir) / feature_file_name(0, 1))
            cfg = FeatureProviderConfig(
                kind=FeatureKind.EXTERNAL, channels=3, source_path=Path(tmpdir)
            )
            with pytest.raises(FeatureSourceError, match="expected shape"):
                FeatureProvider(cfg).features(0, np.zeros((8, 8, 3), dtype=np.float32), 1)

    def test_external_requires_source(self) -> None:
        """External features without a directory fail validation."""
        with pytest.raises(ValueError, match="source_path"):
            FeatureProviderConfig(kind=FeatureKind.EXTERNAL)


class TestRng:
    """Tests for seeded random streams."""

    def test_same_seed_same_sequence(self) -> None:
        """Two streams with one seed agree."""
        np.testing.assert_array_equal(Rng(7).uniform(5), Rng(7).uniform(5))

    def test_draws_advance_the_stream(self) -> None:
        """Consecutive draws differ."""
        rng = Rng(7)
        assert not np.array_equal(rng.uniform(5), rng.uniform(5))

    def test_uniform_range_and_dtype(self) -> None:
        """Uniform draws are float32 in [0, 1)."""
        values = rng_uniform(Rng(1), 1000)
        assert values.dtype == np.float32
        assert values.min() >= 0.0 and values.max() < 1.0

    def test_rng_uniform_rejects_empty(self) -> None:
        """At least one value must be requested."""
        with pytest.raises(InvalidDrawCountError):
            rng_uniform(Rng(0), 0)

    def test_spawned_streams_differ(self) -> None:
        """Spawned streams are distinct from each other and reproducible."""
        rng = Rng(3)
        a = rng.spawn(0).uniform(4)
        b = rng.spawn(1).uniform(4)

        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, Rng(3).spawn(0).uniform(4))
