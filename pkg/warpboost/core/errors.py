"""Exception hierarchy for WarpBoost.

Every error raised by the library derives from :class:`WarpboostError` so
that the CLI can turn any of them into a clean exit with a single handler.
"""


class WarpboostError(Exception):
    """Base exception for all WarpBoost errors."""

    pass


# -- tensor and image files -------------------------------------------------


class TensorFormatError(WarpboostError):
    """Raised when a TNSR file cannot be decoded."""

    pass


class BadMagicError(TensorFormatError):
    """Raised when a TNSR file does not start with the expected magic."""

    pass


class TruncatedPayloadError(TensorFormatError):
    """Raised when a TNSR file ends before its declared payload."""

    pass


class TooManyDimensionsError(TensorFormatError):
    """Raised when a tensor declares more dimensions than the format allows."""

    pass


class UnsupportedVersionError(TensorFormatError):
    """Raised when a TNSR file was written by an unknown format version."""

    pass


class PfmFormatError(WarpboostError):
    """Raised when a Portable Float Map cannot be decoded."""

    pass


class MalformedHeaderError(PfmFormatError):
    """Raised when a PFM header is not parseable."""

    pass


class UnsupportedChannelsError(PfmFormatError):
    """Raised when a PFM file is not single-channel."""

    pass


class NonFiniteTensorError(WarpboostError):
    """Raised when a tensor that must be finite contains NaN or infinity."""

    pass


class InvalidDrawCountError(WarpboostError):
    """Raised when fewer than one random value is requested."""

    pass


class FeatureScaleError(WarpboostError):
    """Raised when a feature scale is unsupported or does not divide the image."""

    pass


class FeatureSourceError(WarpboostError):
    """Raised when externally supplied features are missing or malformed."""

    pass


# -- geometry ----------------------------------------------------------------


class GeometryError(WarpboostError):
    """Base exception for camera and warping errors."""

    pass


class InvalidIntrinsicsError(GeometryError):
    """Raised when focal lengths or the principal point are out of range."""

    pass


class NonOrthonormalRotationError(GeometryError):
    """Raised when a pose rotation is not a proper rotation matrix."""

    pass


class EmptyRangeError(GeometryError):
    """Raised when a depth range is empty or starts at a non-positive depth."""

    pass


class TooFewCandidatesError(GeometryError):
    """Raised when a depth grid would hold fewer than two candidates."""

    pass


class NonPositiveDepthError(GeometryError):
    """Raised when a depth map contains zero or negative depths."""

    pass


class MissingBaseDepthError(GeometryError):
    """Raised when residual candidates are warped without a base depth map."""

    pass


class UpsampleOnlyError(GeometryError):
    """Raised when a resize would shrink a map."""

    pass


class ShapeMismatchError(GeometryError):
    """Raised when two arrays that must align have different shapes."""

    pass


# -- epipolar attention ------------------------------------------------------


class EpipolarError(WarpboostError):
    """Base exception for correlation and attention errors."""

    pass


class ChannelMismatchError(EpipolarError):
    """Raised when target and source features have different channel counts."""

    pass


class NoSourcesError(EpipolarError):
    """Raised when a multi-view correlation receives no source views."""

    pass


class NegativeRadiusError(EpipolarError):
    """Raised when a refinement radius is negative."""

    pass


# -- iterative depth ---------------------------------------------------------


class BoostingError(WarpboostError):
    """Base exception for the iterative depth pipeline."""

    pass


class NotEnoughViewsError(BoostingError):
    """Raised when fewer than two views are supplied."""

    pass


class PipelineConfigError(BoostingError):
    """Raised when a pipeline schedule does not fit the input images."""

    pass


class SearchRangeError(BoostingError):
    """Raised when a residual search range is requested for a unit without a predecessor."""

    pass


class EmptyTraceError(BoostingError):
    """Raised when a depth trace without units is asked for its final depth."""

    pass


# -- Gaussian focused module -------------------------------------------------


class GfmError(WarpboostError):
    """Base exception for windowed sparse attention errors."""

    pass


class IndivisibleWindowError(GfmError):
    """Raised when the feature map is not tiled exactly by the window."""

    pass


class InvalidShiftError(GfmError):
    """Raised when a window shift is neither zero nor half the window."""

    pass


class IndexOutOfWindowError(GfmError):
    """Raised when a retained key index points outside its window."""

    pass


class ZeroRetainError(GfmError):
    """Raised when a layer is asked to retain no keys."""

    pass


class ScheduleExceedsWindowError(GfmError):
    """Raised when a retain count exceeds the tokens in a window."""

    pass


class InvalidScheduleError(GfmError):
    """Raised when a retain schedule is increasing or has the wrong length."""

    pass


class AlignmentError(GfmError):
    """Raised when attention weights, indices and values do not line up."""

    pass


# -- splatting ---------------------------------------------------------------


class SplatError(WarpboostError):
    """Base exception for Gaussian assembly and rendering errors."""

    pass


class InsufficientChannelsError(SplatError):
    """Raised when the raw Gaussian head has fewer than eight channels."""

    pass


# -- scenes ------------------------------------------------------------------


class SceneError(WarpboostError):
    """Base exception for synthetic scene generation and storage."""

    pass


class InvalidSceneFileError(SceneError):
    """Raised when a scene configuration file is not a YAML mapping."""

    pass


class GeometryOutsideRangeError(SceneError):
    """Raised when scene geometry leaves the configured depth range."""

    pass


class MissingPosesError(SceneError):
    """Raised when a scene directory has no poses file."""

    pass


class MissingSceneFileError(SceneError):
    """Raised when an image or depth file of a scene is missing."""

    pass


# -- jobs --------------------------------------------------------------------


class JobError(WarpboostError):
    """Base exception for CLI job failures."""

    pass


class UnknownViewError(JobError):
    """Raised when a requested view id does not exist in the scene."""

    pass


class MissingDepthError(JobError):
    """Raised when predicted depth maps are requested but unavailable."""

    pass


class NoTrialsError(JobError):
    """Raised when a benchmark is asked to run zero trials."""

    pass
