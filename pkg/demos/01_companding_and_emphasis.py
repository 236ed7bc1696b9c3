"""Companding and noise shaping.

Walks through the two tricks that make an 8-bit output alphabet usable at
16 kHz: mu-law companding (quantization noise proportional to signal
level) and the pre-/de-emphasis filter pair (quantization noise pushed
away from where speech energy lives).
"""

import numpy as np

from lpcnet import (
    EmphasisState,
    deemphasize,
    mulaw_decode,
    mulaw_encode,
    preemphasize,
)

# --- the 256-level companding law -----------------------------------------
# Level 128 is exactly zero; steps grow roughly exponentially with level.

levels = np.arange(256)
centers = mulaw_decode(levels)
print("level   0 ->", centers[0])
print("level 128 ->", centers[128])
print("level 255 ->", centers[255])
print("smallest step:", centers[129] - centers[128])
print("largest step: ", centers[255] - centers[254])

# Round trip: every level survives encode(decode(level)).
assert np.array_equal(mulaw_encode(centers), levels)

# Quantization SNR on a half-scale sine: ~35 dB, independent of level
# because the step size tracks the signal amplitude.
t = np.arange(16000)
for amp in (0.9, 0.5, 0.1):
    x = amp * np.sin(2 * np.pi * 1000 * t / 16000)
    y = mulaw_decode(mulaw_encode(x))
    snr = 10 * np.log10(np.sum(x * x) / np.sum((x - y) ** 2))
    print(f"sine amplitude {amp}: round-trip SNR {snr:.1f} dB")

# --- pre-emphasis / de-emphasis --------------------------------------------
# E(z) = 1 - 0.85 z^-1 boosts highs before quantization; D(z) = 1/E(z)
# undoes it afterwards, shaping the flat quantization noise downward at
# high frequencies where the ear would notice it most.

x = np.random.default_rng(0).uniform(-0.5, 0.5, 4000)
y = deemphasize(preemphasize(x, EmphasisState()), EmphasisState())
print("filter pair max reconstruction error:", np.max(np.abs(y - x)))

# The filters carry one sample of memory, so chunked streaming is exact:
pre, de = EmphasisState(), EmphasisState()
chunked = np.concatenate([
    deemphasize(preemphasize(chunk, pre), de)
    for chunk in np.array_split(x, 7)
])
print("chunked equals whole:", np.allclose(chunked, y, atol=1e-12))

# Frequency response at Nyquist: the forward filter gains (1 + 0.85),
# so de-emphasis attenuates noise there by the same factor.
w = np.pi
gain = abs(1 - 0.85 * np.exp(-1j * w))
print(f"|E| at Nyquist: {gain:.2f} ({20 * np.log10(gain):.1f} dB boost, "
      f"same amount of noise cut after D)")
