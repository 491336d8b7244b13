"""Gaussian focused module weights: generation, validation and storage.

On disk the weights are a directory of TNSR files plus a
``manifest.json`` naming every matrix.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from warpboost.config.settings import GfmConfig
from warpboost.core.errors import (
    AlignmentError,
    InvalidScheduleError,
    ScheduleExceedsWindowError,
    ZeroRetainError,
)
from warpboost.tensorio.rng import Rng
from warpboost.tensorio.tensor import DoubleArray, load_tensor, save_tensor

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MATRIX_NAMES = ("w_q", "w_k", "w_v", "w_out", "lepe")


@dataclass(frozen=True, eq=False)
class GfmLayerWeights:
    """Projections and positional kernels of one layer."""

    w_q: DoubleArray
    w_k: DoubleArray
    w_v: DoubleArray
    w_out: DoubleArray
    lepe: DoubleArray

    def matrix(self, name: str) -> DoubleArray:
        array: DoubleArray = getattr(self, name)
        return array


@dataclass(frozen=True, eq=False)
class GfmWeights:
    """All layers of a module plus its window and head layout."""

    layers: list[GfmLayerWeights]
    heads: int
    window: int
    retain_schedule: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        validate_schedule(self.retain_schedule, self.window, len(self.layers))
        channels = self.channels
        if self.heads < 1 or self.heads > channels:
            raise AlignmentError(f"{self.heads} heads cannot split {channels} channels")
        for index, layer in enumerate(self.layers):
            for name in ("w_q", "w_k", "w_v", "w_out"):
                if layer.matrix(name).shape != (channels, channels):
                    raise AlignmentError(f"layer {index} {name} is not {channels}x{channels}")
            if layer.lepe.shape != (channels, 3, 3):
                raise AlignmentError(f"layer {index} lepe is not {channels}x3x3")

    @property
    def channels(self) -> int:
        """Token channels C."""
        return int(self.layers[0].w_q.shape[0]) if self.layers else 0

    @property
    def head_groups(self) -> list[slice]:
        """Contiguous channel slice of each head.

        When C is not a multiple of the head count the first groups get one
        extra channel.
        """
        bounds = np.cumsum([0] + [len(g) for g in np.array_split(np.arange(self.channels), self.heads)])
        return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def validate_schedule(schedule: list[int], window: int, layers: int | None = None) -> None:
    """Check a retain schedule against a window size.

    Raises:
        ScheduleExceedsWindowError: If an entry exceeds ``window²``.
        ZeroRetainError: If an entry is below 1.
        InvalidScheduleError: If the schedule is empty, increasing, or its
            length differs from ``layers``.
    """
    if not schedule:
        raise InvalidScheduleError("retain schedule is empty")
    tokens = window * window
    for entry in schedule:
        if entry > tokens:
            raise ScheduleExceedsWindowError(f"retain count {entry} exceeds the {tokens} tokens of a window")
        if entry < 1:
            raise ZeroRetainError(f"retain count must be at least 1, got {entry}")
    if any(b > a for a, b in zip(schedule, schedule[1:])):
        raise InvalidScheduleError(f"retain schedule must be non-increasing: {schedule}")
    if layers is not None and len(schedule) != layers:
        raise InvalidScheduleError(f"schedule has {len(schedule)} entries for {layers} layers")


def generate_weights(cfg: GfmConfig) -> GfmWeights:
    """Seeded random weights for the configured module.

    Projections are standard normal scaled by ``1/sqrt(C)``; positional
    kernels by ``1/3``.
    """
    validate_schedule(cfg.retain_schedule, cfg.window)
    channels = cfg.channels
    rng = Rng(cfg.seed)
    scale = 1.0 / np.sqrt(channels)

    layers = []
    for index in range(len(cfg.retain_schedule)):
        stream = rng.spawn(index)
        layers.append(
            GfmLayerWeights(
                w_q=stream.normal((channels, channels), scale),
                w_k=stream.normal((channels, channels), scale),
                w_v=stream.normal((channels, channels), scale),
                w_out=stream.normal((channels, channels), scale),
                lepe=stream.normal((channels, 3, 3), 1.0 / 3.0),
            )
        )
    logger.debug(f"Generated {len(layers)} GFM layers with seed {cfg.seed}")
    return GfmWeights(layers, cfg.heads, cfg.window, list(cfg.retain_schedule))


def identity_weights(channels: int, heads: int, window: int, schedule: list[int]) -> GfmWeights:
    """Identity projections and zero positional kernels."""
    eye = np.eye(channels)
    layers = [
        GfmLayerWeights(eye, eye, eye, eye, np.zeros((channels, 3, 3))) for _ in schedule
    ]
    return GfmWeights(layers, heads, window, list(schedule))


def save_weights(weights: GfmWeights, directory: str | Path) -> None:
    """Write weights as TNSR files plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    manifest_layers = []
    for index, layer in enumerate(weights.layers):
        entry = {}
        for name in MATRIX_NAMES:
            file_name = f"layer{index:02d}_{name}.tnsr"
            save_tensor(layer.matrix(name), directory / file_name)
            entry[name] = file_name
        manifest_layers.append(entry)

    manifest = {
        "format": 1,
        "channels": weights.channels,
        "heads": weights.heads,
        "window": weights.window,
        "retain_schedule": list(weights.retain_schedule),
        "layers": manifest_layers,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_weights(directory: str | Path) -> GfmWeights:
    """Read weights written by :func:`save_weights`.

    Raises:
        FileNotFoundError: If the manifest is missing.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"GFM manifest not found: {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    layers = []
    for entry in manifest["layers"]:
        arrays = {name: load_tensor(directory / entry[name]).astype(np.float64) for name in MATRIX_NAMES}
        layers.append(GfmLayerWeights(**arrays))
    return GfmWeights(
        layers,
        int(manifest["heads"]),
        int(manifest["window"]),
        [int(v) for v in manifest["retain_schedule"]],
    )
