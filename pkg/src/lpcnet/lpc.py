"""Linear prediction derived from the band cepstrum.

Pipeline: cepstrum -> log band energies -> per-bin power spectrum (linear
interpolation of the log energies between band anchors) -> autocorrelation
(inverse real FFT) -> Levinson-Durbin.  The predictor is recomputed once
per frame and held constant over the frame's 160 samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import FFT_SIZE, INTERP_WEIGHTS, log_bands_from_cepstrum
from .errors import DegenerateAutocorrelationError

LPC_ORDER = 16

# Mild binomial lag window C(2N, N-k)/C(2N, N); with N=1024 it tapers lag 16
# by only ~22%, enough to keep quantized/interpolated spectra well behaved.
_LAG_WINDOW_N = 1024
_NOISE_FLOOR = 1e-4


def _binomial_lag_window(order: int, n: int = _LAG_WINDOW_N) -> np.ndarray:
    w = np.empty(order + 1)
    w[0] = 1.0
    for k in range(1, order + 1):
        w[k] = w[k - 1] * (n - k + 1) / (n + k)
    return w


_LAG_WINDOW = _binomial_lag_window(LPC_ORDER)


def levinson_durbin(r, order: int) -> np.ndarray:
    """Solve the Toeplitz normal equations for the predictor a_1..a_order.

    Raises DegenerateAutocorrelationError if any reflection coefficient
    reaches magnitude 1, which a positive-definite autocorrelation cannot
    produce.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.size < order + 1:
        raise ValueError(f"need {order + 1} lags, got {r.size}")
    if r[0] <= 0:
        raise DegenerateAutocorrelationError(f"r[0] = {r[0]} is not positive")
    a = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] - np.dot(a[:i - 1], r[i - 1:0:-1])
        k = acc / err
        if abs(k) >= 1.0:
            raise DegenerateAutocorrelationError(
                f"reflection coefficient {k:.6f} at step {i}"
            )
        if i > 1:
            a[:i - 1] -= k * a[i - 2::-1]
        a[i - 1] = k
        err *= 1.0 - k * k
    return a


def cepstrum_to_lpc(cepstrum) -> np.ndarray:
    """Order-16 predictor coefficients from an 18-value band cepstrum."""
    log_bands = log_bands_from_cepstrum(cepstrum)
    psd = np.exp(INTERP_WEIGHTS @ log_bands)
    acorr = np.fft.irfft(psd, FFT_SIZE)[:LPC_ORDER + 1]
    acorr[0] *= 1.0 + _NOISE_FLOOR
    acorr[1:] *= _LAG_WINDOW[1:]
    return levinson_durbin(acorr, LPC_ORDER)


@dataclass
class LpcState:
    """Per-frame coefficients plus the last 16 reconstructed samples.

    `history[0]` is the most recent sample; prediction and history live in
    the pre-emphasis, mu-law-quantized signal domain.
    """

    coeffs: np.ndarray = field(
        default_factory=lambda: np.zeros(LPC_ORDER, dtype=np.float32)
    )
    history: np.ndarray = field(
        default_factory=lambda: np.zeros(LPC_ORDER, dtype=np.float32)
    )

    def set_coeffs(self, a) -> None:
        self.coeffs = np.asarray(a, dtype=np.float32)
        if self.coeffs.shape != (LPC_ORDER,):
            raise ValueError(f"predictor must have order {LPC_ORDER}")


def predict(state: LpcState) -> float:
    """p_t = sum_k a_k * s_(t-k); does not mutate the state."""
    return float(np.dot(state.coeffs, state.history))


def update_history(state: LpcState, sample: float) -> LpcState:
    """Shift the newest sample in, dropping the oldest."""
    state.history[1:] = state.history[:-1]
    state.history[0] = sample
    return state
