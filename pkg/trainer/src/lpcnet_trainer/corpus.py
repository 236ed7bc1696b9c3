"""Synthetic pseudo-speech corpus generator.

A stand-in for a real single-speaker corpus when none is on disk: voiced
segments are pulse trains with drifting pitch through slowly varying
formant-like all-pole filters, interleaved with filtered-noise consonant
stand-ins and short silences.  Good enough to exercise the full training
and copy-synthesis loop end to end.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.signal

from . import audio


def _formant_filter(rng):
    freqs = np.sort(rng.uniform([250, 800, 1800, 2800], [700, 1600, 2600, 3400]))
    radii = rng.uniform(0.88, 0.94, size=4)
    poles = []
    for f, r in zip(freqs, radii):
        ang = 2 * np.pi * f / audio.SAMPLE_RATE
        poles += [r * np.exp(1j * ang), r * np.exp(-1j * ang)]
    return np.real(np.poly(poles))


def _voiced_segment(rng, n):
    period = rng.uniform(55, 140)
    drift = rng.uniform(-0.15, 0.15)
    pulses = np.zeros(n)
    pos = 0.0
    while pos < n:
        pulses[int(pos)] = 1.0
        pos += period * (1.0 + drift * pos / n)
    shaped = scipy.signal.lfilter([1.0], _formant_filter(rng), pulses)
    shaped += 0.01 * rng.normal(size=n)
    return shaped


def _unvoiced_segment(rng, n):
    noise = rng.normal(size=n)
    b, a = scipy.signal.butter(2, rng.uniform(0.2, 0.6), "highpass")
    return 0.35 * scipy.signal.lfilter(b, a, noise)


def synth_utterance(rng, seconds=5.0) -> np.ndarray:
    n = int(seconds * audio.SAMPLE_RATE)
    out = np.zeros(n)
    pos = 0
    while pos < n:
        kind = rng.uniform()
        dur = int(rng.uniform(0.1, 0.5) * audio.SAMPLE_RATE)
        dur = min(dur, n - pos)
        if kind < 0.6:
            seg = _voiced_segment(rng, dur)
        elif kind < 0.85:
            seg = _unvoiced_segment(rng, dur)
        else:
            seg = np.zeros(dur)
        if seg.any():
            env = np.minimum(1.0, np.minimum(
                np.arange(dur), np.arange(dur)[::-1]) / 160.0)
            seg = seg * env
            peak = np.max(np.abs(seg))
            if peak > 0:
                seg = seg / peak * rng.uniform(0.15, 0.45)
        out[pos:pos + dur] = seg
        pos += dur
    return out


def generate_corpus(out_dir, minutes=1.0, seconds_per_file=5.0, seed=0) -> list:
    """Write WAV files totalling `minutes` of synthetic speech-like audio."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n_files = max(1, round(minutes * 60.0 / seconds_per_file))
    paths = []
    for i in range(n_files):
        path = out_dir / f"utt{i:04d}.wav"
        audio.write_wav(path, synth_utterance(rng, seconds_per_file))
        paths.append(path)
    return paths
