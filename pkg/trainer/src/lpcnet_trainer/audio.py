"""Sample-domain math the trainer needs on its side of the fence.

The trainer talks to the inference engine only through files (WAV in,
features via the engine CLI, weights out), so the handful of normative
formulas used to build training targets is reimplemented here from the
engine's documented constants: mu-law companding, pre-emphasis, and the
cepstrum-to-predictor pipeline.  Any change must track the engine docs.
"""

from __future__ import annotations

import math
import wave

import numpy as np
from scipy.fft import dct

SAMPLE_RATE = 16000
FRAME_SIZE = 160
FFT_SIZE = 320
FREQ_BINS = FFT_SIZE // 2 + 1
PREEMPH = 0.85
NB_BANDS = 18
NB_FEATURES = 20
LPC_ORDER = 16

BAND_BINS = np.array(
    [0, 4, 8, 12, 16, 20, 24, 28, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160]
)

_MU_LOG = math.log(256.0)


def read_wav(path) -> np.ndarray:
    """PCM 16-bit mono 16 kHz WAV to float64 in [-1, 1)."""
    with wave.open(str(path), "rb") as wf:
        if (wf.getnchannels(), wf.getsampwidth(), wf.getframerate()) != \
                (1, 2, SAMPLE_RATE):
            raise ValueError(f"{path}: need PCM 16-bit mono {SAMPLE_RATE} Hz")
        raw = wf.readframes(wf.getnframes())
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def write_wav(path, samples) -> None:
    ints = np.clip(np.round(np.asarray(samples) * 32768.0),
                   -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(SAMPLE_RATE)
        wf.writeframes(ints.tobytes())


def preemphasize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = x.copy()
    out[1:] -= PREEMPH * x[:-1]
    return out


def mulaw_encode(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    mag = np.log1p(255.0 * np.abs(x)) * (128.0 / _MU_LOG)
    return np.clip(np.round(np.sign(x) * mag) + 128.0, 0, 255).astype(np.int64)


def mulaw_decode(level) -> np.ndarray:
    u = np.asarray(level, dtype=np.float64) - 128.0
    return np.sign(u) * (np.exp(np.abs(u) * (_MU_LOG / 128.0)) - 1.0) / 255.0


def _interp_weights() -> np.ndarray:
    p = np.zeros((FREQ_BINS, NB_BANDS))
    for k in range(NB_BANDS - 1):
        lo, hi = BAND_BINS[k], BAND_BINS[k + 1]
        for j in range(lo, hi):
            frac = (j - lo) / (hi - lo)
            p[j, k] = 1.0 - frac
            p[j, k + 1] = frac
    p[BAND_BINS[-1], NB_BANDS - 1] = 1.0
    return p


_INTERP = _interp_weights()


def _lag_window(order: int, n: int = 1024) -> np.ndarray:
    w = np.empty(order + 1)
    w[0] = 1.0
    for k in range(1, order + 1):
        w[k] = w[k - 1] * (n - k + 1) / (n + k)
    return w


_LAG_WINDOW = _lag_window(LPC_ORDER)


def levinson(r: np.ndarray, order: int) -> np.ndarray:
    a = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        k = (r[i] - np.dot(a[:i - 1], r[i - 1:0:-1])) / err
        if abs(k) >= 1.0:
            raise ValueError(f"reflection coefficient {k} at step {i}")
        if i > 1:
            a[:i - 1] -= k * a[i - 2::-1]
        a[i - 1] = k
        err *= 1.0 - k * k
    return a


def cepstrum_to_lpc(cepstrum) -> np.ndarray:
    """Same pipeline the engine runs at synthesis time."""
    log_bands = dct(np.asarray(cepstrum, dtype=np.float64), type=3,
                    norm="ortho")
    psd = np.exp(_INTERP @ log_bands)
    r = np.fft.irfft(psd, FFT_SIZE)[:LPC_ORDER + 1]
    r[0] *= 1.0 + 1e-4
    r[1:] *= _LAG_WINDOW[1:]
    return levinson(r, LPC_ORDER)
