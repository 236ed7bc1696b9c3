"""Excitation sampling: pitch-adaptive sharpening, probability floor, draw.

The random stream is NumPy's Philox counter-based generator (Philox 4x64
with 10 rounds) keyed by the seed; each drawn sample consumes exactly one
double from ``Generator.random()``.  The generator identity is part of the
reproducibility contract: same weights, features and seed must give
bit-identical audio anywhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger("lpcnet.sampler")

DEFAULT_FLOOR = 0.002
NB_LEVELS = 256


@dataclass
class SamplerConfig:
    """Knobs for the excitation draw.

    `floor` is the probability threshold subtracted after sharpening.
    `temp_scale` scales the pitch-driven part of the sharpening exponent;
    1.0 is the standard behavior.
    """

    floor: float = DEFAULT_FLOOR
    temp_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.floor < 1.0:
            raise ValueError("floor must be in [0, 1)")

    def make_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))


def temperature(g_p: float, temp_scale: float = 1.0) -> float:
    """Sharpening exponent c = 1 + max(0, 1.5*g_p - 0.5), clamping g_p.

    Rises linearly from 1 (unvoiced) to 2 (fully voiced) once the pitch
    correlation passes 1/3.
    """
    g = min(max(float(g_p), 0.0), 1.0)
    return 1.0 + temp_scale * max(0.0, 1.5 * g - 0.5)


def _renorm(p: np.ndarray) -> np.ndarray:
    return p / p.sum()


def sharpen_and_floor(dist: np.ndarray, c: float, threshold: float) -> np.ndarray:
    """Raise to the power c, renormalize, subtract the floor, renormalize.

    The power is taken in the log domain so c=2 cannot underflow small
    probabilities; exact zeros stay zero.  If the floor wipes out every
    entry (threshold misuse), falls back to a one-hot at the argmax and
    logs a warning.
    """
    out, _ = _sharpen_and_floor(dist, c, threshold)
    return out


def _sharpen_and_floor(dist, c, threshold):
    p = np.asarray(dist, dtype=np.float64)
    if c != 1.0:
        sharp = np.zeros_like(p)
        pos = p > 0
        sharp[pos] = np.exp(c * np.log(p[pos]))
    else:
        sharp = p.copy()
    sharp = _renorm(sharp)
    floored = np.maximum(sharp - threshold, 0.0)
    total = floored.sum()
    if total <= 0.0:
        logger.warning(
            "probability floor %.4g wiped the whole distribution; "
            "falling back to argmax", threshold,
        )
        out = np.zeros_like(p)
        out[int(np.argmax(p))] = 1.0
        return out, True
    return floored / total, False


def draw(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of a level; consumes one uniform double."""
    p = np.asarray(dist, dtype=np.float64)
    cdf = p.cumsum()
    u = rng.random() * cdf[-1]
    level = int(np.searchsorted(cdf, u, side="right"))
    if level >= p.size:
        level = p.size - 1
    while p[level] == 0.0 and level > 0:
        level -= 1
    return level
