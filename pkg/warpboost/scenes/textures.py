"""Smooth procedural textures evaluated at surface coordinates.

All textures are continuous functions of ``(u, v)`` in scene units, so the
same surface point gets the same colour in every view.
"""

import numpy as np

from warpboost.scenes.models import TextureKind
from warpboost.tensorio.rng import Rng
from warpboost.tensorio.tensor import DoubleArray

LATTICE_SIZE = 97


def _smoothstep(t: DoubleArray) -> DoubleArray:
    return t * t * (3.0 - 2.0 * t)


def value_noise(u: np.ndarray, v: np.ndarray, cell: float, seed: int) -> DoubleArray:
    """Bilinearly blended lattice noise in ``[0, 1)`` with lattice spacing ``cell``."""
    lattice = Rng(seed).uniform(LATTICE_SIZE * LATTICE_SIZE).astype(np.float64)
    lattice = lattice.reshape(LATTICE_SIZE, LATTICE_SIZE)

    su, sv = np.asarray(u) / cell, np.asarray(v) / cell
    iu, iv = np.floor(su), np.floor(sv)
    fu, fv = _smoothstep(su - iu), _smoothstep(sv - iv)
    i0 = iu.astype(np.int64) % LATTICE_SIZE
    j0 = iv.astype(np.int64) % LATTICE_SIZE
    i1 = (i0 + 1) % LATTICE_SIZE
    j1 = (j0 + 1) % LATTICE_SIZE

    top = lattice[j0, i0] * (1.0 - fu) + lattice[j0, i1] * fu
    bottom = lattice[j1, i0] * (1.0 - fu) + lattice[j1, i1] * fu
    return top * (1.0 - fv) + bottom * fv


def checker(u: np.ndarray, v: np.ndarray, period: float) -> DoubleArray:
    """Soft-edged checkerboard in ``(0, 1)``; one light and one dark square per period."""
    wave = np.sin(2.0 * np.pi * np.asarray(u) / period) * np.sin(2.0 * np.pi * np.asarray(v) / period)
    return 0.5 + 0.5 * np.tanh(2.0 * wave)


def _gradient_mix(u: np.ndarray, v: np.ndarray, period: float, seed: int, channel: int) -> DoubleArray:
    rng = Rng(seed).spawn(channel)
    angles = rng.generator.uniform(0.0, np.pi, size=3)
    freqs = rng.generator.uniform(0.6, 1.4, size=3)
    phases = rng.generator.uniform(0.0, 2.0 * np.pi, size=3)
    out = np.full(np.shape(u), 0.5)
    for angle, freq, phase in zip(angles, freqs, phases):
        along = np.cos(angle) * np.asarray(u) + np.sin(angle) * np.asarray(v)
        out = out + 0.12 * np.sin(2.0 * np.pi * freq * along / period + phase)
    return out + 0.25 * (value_noise(u, v, period, seed + 101 * (channel + 1)) - 0.5)


def texture_rgb(
    kind: TextureKind,
    u: np.ndarray,
    v: np.ndarray,
    period: float,
    seed: int,
) -> DoubleArray:
    """Evaluate a texture at surface coordinates.

    Args:
        kind: Texture family.
        u: Surface coordinate along the first face axis.
        v: Surface coordinate along the second face axis.
        period: Dominant period in scene units.
        seed: Seed for the noise components.

    Returns:
        ``[..., 3]`` colours clipped to ``[0, 1]``.
    """
    channels = []
    for c in range(3):
        noise_seed = seed * 7 + c
        if kind == TextureKind.CHECKER:
            value = 0.1 + 0.65 * checker(u, v, period) + 0.25 * value_noise(u, v, 0.7 * period, noise_seed)
        elif kind == TextureKind.NOISE:
            value = 0.65 * value_noise(u, v, 0.5 * period, noise_seed) + 0.35 * value_noise(
                u, v, 0.25 * period, noise_seed + 31
            )
        else:
            value = _gradient_mix(u, v, period, seed, c)
        channels.append(value)
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0)
