"""Sample-domain primitives.

Framing, pre-/de-emphasis, mu-law companding, band-cepstral analysis and
open-loop pitch estimation.  All audio is mono 16 kHz, floating samples in
[-1, 1) with 16-bit full scale mapped to 1.0 (32768 -> 1.0).

The band layout below is normative: any change invalidates trained weights
and the frozen test expectations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.signal import lfilter

from .errors import InsufficientSamplesError

SAMPLE_RATE = 16000
FRAME_SIZE = 160          # 10 ms hop
WINDOW_SIZE = 320         # 20 ms analysis window, centered on the frame
FFT_SIZE = 320
FREQ_BINS = FFT_SIZE // 2 + 1

PREEMPH = 0.85

NB_BANDS = 18
NB_FEATURES = 20          # 18 cepstra + normalized period + correlation

# Band anchor bins (50 Hz per bin).  Adjacent anchors define overlapping
# triangular bands; widths grow with frequency, approximating a perceptual
# (Bark-like) scale over 0..8000 Hz.
BAND_BINS = np.array(
    [0, 4, 8, 12, 16, 20, 24, 28, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160]
)
BAND_HZ = BAND_BINS * (SAMPLE_RATE // FFT_SIZE)

LOG_ENERGY_FLOOR = 1e-10

PITCH_MIN_PERIOD = 32     # 500 Hz
PITCH_MAX_PERIOD = 256    # 62.5 Hz
# Small score bias toward shorter lags; breaks ties between a period and
# its integer multiples without a dynamic-programming tracker.
PITCH_LAG_BIAS = 0.02

# Network input encoding of the pitch period (normative for weights).
PERIOD_OFFSET = 100.0
PERIOD_SCALE = 50.0


# ---------------------------------------------------------------------------
# Pre-emphasis / de-emphasis
# ---------------------------------------------------------------------------


@dataclass
class EmphasisState:
    """One-sample memory for the first-order emphasis filter pair.

    For pre-emphasis `mem` holds the last input sample; for de-emphasis it
    holds the last output sample.  A fresh state starts from silence.
    """

    alpha: float = PREEMPH
    mem: float = 0.0


def preemphasize(audio, state: EmphasisState | None = None) -> np.ndarray:
    """High-boost filter 1 - alpha*z^-1, streaming-safe across chunks."""
    if state is None:
        state = EmphasisState()
    x = np.asarray(audio, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    prev = np.empty_like(x)
    prev[0] = state.mem
    prev[1:] = x[:-1]
    out = x - state.alpha * prev
    state.mem = float(x[-1])
    return out


def deemphasize(audio, state: EmphasisState | None = None) -> np.ndarray:
    """Inverse filter 1 / (1 - alpha*z^-1), applied to the synthesis output."""
    if state is None:
        state = EmphasisState()
    x = np.asarray(audio, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    out, _ = lfilter([1.0], [1.0, -state.alpha], x, zi=[state.alpha * state.mem])
    state.mem = float(out[-1])
    return out


# ---------------------------------------------------------------------------
# mu-law companding (256 levels, level 128 == 0)
# ---------------------------------------------------------------------------

_MU_LOG = math.log(256.0)
_MU_SCALE = 128.0 / _MU_LOG


def mulaw_encode(x):
    """Map samples in [-1, 1) to levels 0..255.

    level = clamp(round(sign(x) * ln(1 + 255|x|) / ln 256 * 128) + 128, 0, 255).
    Out-of-range inputs are handled by the final clamp.  Works on scalars
    and arrays; scalars return a Python int.
    """
    if isinstance(x, (float, int)):
        mag = math.log1p(255.0 * abs(x)) * _MU_SCALE
        level = round(math.copysign(mag, x)) + 128
        return min(255, max(0, level))
    x = np.asarray(x, dtype=np.float64)
    mag = np.log1p(255.0 * np.abs(x)) * _MU_SCALE
    level = np.clip(np.round(np.sign(x) * mag) + 128.0, 0, 255).astype(np.int64)
    if level.ndim == 0:
        return int(level)
    return level


def _decode_table() -> np.ndarray:
    u = np.arange(256, dtype=np.float64) - 128.0
    return np.sign(u) * (np.exp(np.abs(u) * (_MU_LOG / 128.0)) - 1.0) / 255.0


_DECODE_TABLE = _decode_table()


def mulaw_decode(level):
    """Exact inverse of the companding law at the 256 quantization centers."""
    if isinstance(level, (int, np.integer)):
        if not 0 <= level <= 255:
            raise ValueError("mu-law level out of range [0, 255]")
        return float(_DECODE_TABLE[level])
    lv = np.asarray(level)
    if np.any(lv < 0) or np.any(lv > 255):
        raise ValueError("mu-law level out of range [0, 255]")
    x = _DECODE_TABLE[np.asarray(lv, dtype=np.intp)]
    if x.ndim == 0:
        return float(x)
    return x


# ---------------------------------------------------------------------------
# Band energies and cepstrum
# ---------------------------------------------------------------------------


def _band_weights() -> np.ndarray:
    """(NB_BANDS, FREQ_BINS) triangular weights; rows sum to 1."""
    w = np.zeros((NB_BANDS, FREQ_BINS))
    for k in range(NB_BANDS - 1):
        lo, hi = BAND_BINS[k], BAND_BINS[k + 1]
        for j in range(lo, hi):
            frac = (j - lo) / (hi - lo)
            w[k, j] += 1.0 - frac
            w[k + 1, j] += frac
    w[NB_BANDS - 1, BAND_BINS[-1]] += 1.0
    return w / w.sum(axis=1, keepdims=True)


def _interp_weights() -> np.ndarray:
    """(FREQ_BINS, NB_BANDS) linear interpolation from anchors to bins."""
    p = np.zeros((FREQ_BINS, NB_BANDS))
    for k in range(NB_BANDS - 1):
        lo, hi = BAND_BINS[k], BAND_BINS[k + 1]
        for j in range(lo, hi):
            frac = (j - lo) / (hi - lo)
            p[j, k] = 1.0 - frac
            p[j, k + 1] = frac
    p[BAND_BINS[-1], NB_BANDS - 1] = 1.0
    return p


BAND_WEIGHTS = _band_weights()
INTERP_WEIGHTS = _interp_weights()

_ANALYSIS_WINDOW = np.sin(np.pi * (np.arange(WINDOW_SIZE) + 0.5) / WINDOW_SIZE)


def band_energies(power_spectrum: np.ndarray) -> np.ndarray:
    """Average power around each band anchor (length NB_BANDS)."""
    return BAND_WEIGHTS @ power_spectrum


def cepstrum_from_bands(energies: np.ndarray) -> np.ndarray:
    """Orthonormal DCT-II of the floored log band energies."""
    logs = np.log(np.maximum(energies, LOG_ENERGY_FLOOR))
    return dct(logs, type=2, norm="ortho")


def log_bands_from_cepstrum(cepstrum: np.ndarray) -> np.ndarray:
    """Inverse of :func:`cepstrum_from_bands` up to the floor."""
    return dct(np.asarray(cepstrum, dtype=np.float64), type=3, norm="ortho")


# ---------------------------------------------------------------------------
# Pitch estimation
# ---------------------------------------------------------------------------


def pitch_search(x: np.ndarray, start: int) -> tuple[int, float]:
    """Open-loop normalized cross-correlation search.

    Compares the window x[start : start+WINDOW_SIZE] against itself delayed
    by each candidate period in [PITCH_MIN_PERIOD, PITCH_MAX_PERIOD].  A
    small bias toward shorter lags resolves the near-ties a periodic signal
    produces at integer multiples of its true period.

    Returns (period, correlation) with correlation clamped to [0, 1].
    """
    if start - PITCH_MAX_PERIOD < 0 or start + WINDOW_SIZE > x.size:
        raise InsufficientSamplesError(
            f"pitch search needs samples [{start - PITCH_MAX_PERIOD}, "
            f"{start + WINDOW_SIZE}), buffer has {x.size}"
        )
    w = x[start:start + WINDOW_SIZE]
    seg = x[start - PITCH_MAX_PERIOD:start + WINDOW_SIZE]
    # num[i] = sum_n w[n] seg[i+n]; lag P corresponds to i = PITCH_MAX_PERIOD - P
    num = np.correlate(seg, w, mode="valid")
    sq = np.concatenate(([0.0], np.cumsum(seg * seg)))
    lag_energy = sq[WINDOW_SIZE:] - sq[:-WINDOW_SIZE]

    periods = np.arange(PITCH_MIN_PERIOD, PITCH_MAX_PERIOD + 1)
    idx = PITCH_MAX_PERIOD - periods
    eps = 1e-9
    denom = np.sqrt(np.maximum(np.dot(w, w), eps) * np.maximum(lag_energy[idx], eps))
    corr = num[idx] / denom
    score = corr - PITCH_LAG_BIAS * periods / PITCH_MAX_PERIOD
    best = int(np.argmax(score))
    return int(periods[best]), float(np.clip(corr[best], 0.0, 1.0))


# ---------------------------------------------------------------------------
# Per-frame analysis
# ---------------------------------------------------------------------------


@dataclass
class FeatureFrame:
    """18 band-cepstral coefficients plus pitch period and correlation."""

    cepstrum: np.ndarray
    period: int
    correlation: float

    def __post_init__(self):
        self.cepstrum = np.asarray(self.cepstrum, dtype=np.float64)
        if self.cepstrum.shape != (NB_BANDS,):
            raise ValueError(f"cepstrum must have {NB_BANDS} values")
        if not np.all(np.isfinite(self.cepstrum)):
            raise ValueError("cepstrum must be finite")
        self.correlation = float(min(max(self.correlation, 0.0), 1.0))

    def to_vector(self) -> np.ndarray:
        """20-value network input: [cepstra, (P-100)/50, correlation]."""
        v = np.empty(NB_FEATURES, dtype=np.float32)
        v[:NB_BANDS] = self.cepstrum
        v[NB_BANDS] = (self.period - PERIOD_OFFSET) / PERIOD_SCALE
        v[NB_BANDS + 1] = self.correlation
        return v


def analyze_frame(audio: np.ndarray, frame_index: int) -> FeatureFrame:
    """Analyze frame `frame_index` of a pre-emphasized signal.

    The analysis window is WINDOW_SIZE samples centered on the frame; the
    pitch search additionally needs PITCH_MAX_PERIOD samples of history
    before the window.  Raises InsufficientSamplesError when the buffer
    cannot cover that span.
    """
    x = np.asarray(audio, dtype=np.float64)
    start = frame_index * FRAME_SIZE - (WINDOW_SIZE - FRAME_SIZE) // 2
    if start - PITCH_MAX_PERIOD < 0 or start + WINDOW_SIZE > x.size:
        raise InsufficientSamplesError(
            f"frame {frame_index} needs samples [{start - PITCH_MAX_PERIOD}, "
            f"{start + WINDOW_SIZE}), buffer has {x.size}"
        )
    windowed = _ANALYSIS_WINDOW * x[start:start + WINDOW_SIZE]
    spectrum = np.abs(np.fft.rfft(windowed, FFT_SIZE)) ** 2
    ceps = cepstrum_from_bands(band_energies(spectrum))
    period, corr = pitch_search(x, start)
    return FeatureFrame(cepstrum=ceps, period=period, correlation=corr)


# Zero pad on the left so frame 0 of the original signal satisfies the
# analyze_frame history requirement while staying frame-aligned.
_PAD_FRAMES = 3
_PAD_LEFT = _PAD_FRAMES * FRAME_SIZE
_PAD_RIGHT = FRAME_SIZE


def features_from_audio(audio) -> np.ndarray:
    """Extract the (n_frames, 20) float32 feature matrix from raw audio.

    The signal is pre-emphasized from silence, zero-padded at both ends so
    every whole frame is analyzable, and analyzed frame by frame.  Trailing
    samples short of a whole frame are dropped.
    """
    x = np.asarray(audio, dtype=np.float64)
    n_frames = x.size // FRAME_SIZE
    if n_frames == 0:
        return np.zeros((0, NB_FEATURES), dtype=np.float32)
    emphasized = preemphasize(x[:n_frames * FRAME_SIZE])
    padded = np.concatenate(
        [np.zeros(_PAD_LEFT), emphasized, np.zeros(_PAD_RIGHT)]
    )
    out = np.empty((n_frames, NB_FEATURES), dtype=np.float32)
    for t in range(n_frames):
        out[t] = analyze_frame(padded, t + _PAD_FRAMES).to_vector()
    return out
