"""Shared fixtures-in-spirit: synthetic processes and signals for tests."""

import numpy as np
import scipy.signal

# Formant-like all-pole process: resonances sharp at low frequencies and
# broader toward Nyquist, ~40 dB envelope dynamic range.  Within what the
# 18-band front end (and its fixed -40 dB autocorrelation noise floor) can
# represent.
FORMANT_FREQS_HZ = [400, 1100, 2000, 3000, 4200, 5400, 6500, 7500]
FORMANT_RADII = [0.88, 0.85, 0.82, 0.80, 0.75, 0.70, 0.62, 0.55]


def formant_ar(freqs_hz=FORMANT_FREQS_HZ, radii=FORMANT_RADII):
    """Order-2k predictor coefficients from conjugate pole pairs."""
    poles = []
    for f, r in zip(freqs_hz, radii):
        ang = 2 * np.pi * f / 16000.0
        poles += [r * np.exp(1j * ang), r * np.exp(-1j * ang)]
    return -np.real(np.poly(poles))[1:]


def ar_signal(a, n_samples, seed=0, scale=0.1):
    """Drive the all-pole filter 1/(1 - sum a_k z^-k) with white noise."""
    rng = np.random.default_rng(seed)
    return scipy.signal.lfilter(
        [1.0], np.concatenate([[1.0], -np.asarray(a)]),
        rng.normal(0.0, scale, n_samples),
    )


def voiced_vowel(n_samples, period=80, seed=0, amplitude=0.3):
    """Pulse train through the formant filter: a synthetic sustained vowel."""
    pulses = np.zeros(n_samples)
    pulses[::period] = 1.0
    a = formant_ar()
    x = scipy.signal.lfilter([1.0], np.concatenate([[1.0], -a]), pulses)
    return amplitude * x / np.max(np.abs(x))
