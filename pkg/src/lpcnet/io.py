"""File interop: strict 16-bit/16 kHz mono WAV and raw float32 feature files.

Feature files are headerless binary, little-endian, one 20-float record per
frame in the order [18 cepstra, normalized period, correlation].
"""

from __future__ import annotations

import wave

import numpy as np

from .dsp import NB_FEATURES, SAMPLE_RATE
from .errors import FeatureFileError, WavFormatError

_FULL_SCALE = 32768.0
_RECORD_BYTES = NB_FEATURES * 4


def read_wav(path) -> np.ndarray:
    """Read a PCM 16-bit mono 16 kHz WAV file as float64 in [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            if channels != 1:
                raise WavFormatError(
                    f"{path}: expected mono, got {channels} channels"
                )
            if width != 2:
                raise WavFormatError(
                    f"{path}: expected 16-bit PCM, got {8 * width}-bit"
                )
            if rate != SAMPLE_RATE:
                raise WavFormatError(
                    f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz"
                )
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise WavFormatError(f"{path}: not a readable WAV file ({exc})") from exc
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / _FULL_SCALE


def write_wav(path, samples) -> None:
    """Write float samples as PCM 16-bit mono 16 kHz, clipping to range."""
    x = np.asarray(samples, dtype=np.float64)
    ints = np.clip(np.round(x * _FULL_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(SAMPLE_RATE)
        wf.writeframes(ints.tobytes())


def read_features(path) -> np.ndarray:
    """Read an (n_frames, 20) float32 feature matrix."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) % _RECORD_BYTES != 0:
        raise FeatureFileError(
            f"{path}: size {len(raw)} is not a multiple of "
            f"{_RECORD_BYTES}-byte records"
        )
    feats = np.frombuffer(raw, dtype="<f4").reshape(-1, NB_FEATURES)
    if not np.all(np.isfinite(feats)):
        raise FeatureFileError(f"{path}: contains non-finite values")
    return feats.copy()


def write_features(path, features) -> None:
    """Write an (n_frames, 20) feature matrix as little-endian float32."""
    feats = np.ascontiguousarray(features, dtype="<f4")
    if feats.ndim != 2 or feats.shape[1] != NB_FEATURES:
        raise FeatureFileError(
            f"features must be (n_frames, {NB_FEATURES}), got {feats.shape}"
        )
    with open(path, "wb") as fh:
        fh.write(feats.tobytes())
