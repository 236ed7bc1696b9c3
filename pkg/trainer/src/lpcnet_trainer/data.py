"""Training data: clean/noisy sample paths, targets, and sequence slicing.

Per utterance: pre-emphasize, quantize, inject integer noise in the mu-law
domain, run the per-frame predictor over the noisy quantized signal, and
take the excitation target as clean-minus-prediction.  The network learns
to fix its own quantization/sampling imperfections because the prediction
it conditions on is computed from the corrupted signal it will actually
see at synthesis time.

Features come from the inference engine's `features` CLI so both sides of
the repo agree on the analysis by construction.
"""

from __future__ import annotations

import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audio

CENTER = 128
CONTEXT = 2  # conv lookahead/lookback frames carried with each sequence


def engine_features(wav_path) -> np.ndarray:
    """Extract the (n_frames, 20) feature matrix via the engine CLI."""
    with tempfile.NamedTemporaryFile(suffix=".f32") as tmp:
        subprocess.run(
            [sys.executable, "-m", "lpcnet.cli", "features",
             str(wav_path), tmp.name],
            check=True, capture_output=True, text=True,
        )
        feats = np.fromfile(tmp.name, dtype="<f4")
    return feats.reshape(-1, audio.NB_FEATURES)


def frame_predictions(s_tilde: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Per-sample predictions from the noisy quantized signal.

    Coefficients come from each frame's cepstrum and are held constant over
    the frame's 160 samples; history before the utterance is zero.
    """
    n_frames = features.shape[0]
    padded = np.concatenate([np.zeros(audio.LPC_ORDER), s_tilde])
    p = np.empty(n_frames * audio.FRAME_SIZE)
    for t in range(n_frames):
        a = audio.cepstrum_to_lpc(features[t, :audio.NB_BANDS])
        start = t * audio.FRAME_SIZE
        seg = padded[start:start + audio.FRAME_SIZE + audio.LPC_ORDER]
        acc = np.zeros(audio.FRAME_SIZE)
        for k in range(1, audio.LPC_ORDER + 1):
            acc += a[k - 1] * seg[audio.LPC_ORDER - k:
                                  audio.LPC_ORDER - k + audio.FRAME_SIZE]
        p[start:start + audio.FRAME_SIZE] = acc
    return p


@dataclass
class UtteranceArrays:
    """Per-sample training views of one utterance (all length n_frames*160)."""

    clean: np.ndarray          # pre-emphasized float signal
    noisy_levels: np.ndarray   # mu-law levels after noise injection
    prediction: np.ndarray     # float predictions from the noisy signal
    s_in: np.ndarray           # network input: noisy level at t-1
    p_in: np.ndarray           # network input: prediction level at t
    e_in: np.ndarray           # network input: target excitation level at t-1
    target: np.ndarray         # target excitation level at t
    features: np.ndarray       # (n_frames, 20)


def build_utterance(audio_samples, features, noise: np.ndarray) -> UtteranceArrays:
    """Assemble the teacher-forcing arrays for one utterance.

    `noise` is an integer array of per-sample mu-law-domain offsets (the
    caller decides amplitudes; synthesis-matched data uses zeros).
    """
    n_frames = features.shape[0]
    n = n_frames * audio.FRAME_SIZE
    x = audio.preemphasize(np.asarray(audio_samples, dtype=np.float64)[:n])
    if x.size != n:
        raise ValueError("audio shorter than the feature matrix")
    clean_levels = audio.mulaw_encode(x)
    noisy_levels = np.clip(clean_levels + np.asarray(noise[:n], dtype=np.int64),
                           0, 255)
    s_tilde = audio.mulaw_decode(noisy_levels)
    prediction = frame_predictions(s_tilde, features)
    excitation = x - prediction
    target = audio.mulaw_encode(excitation)
    p_in = audio.mulaw_encode(prediction)

    s_in = np.empty(n, dtype=np.int64)
    s_in[0] = CENTER
    s_in[1:] = noisy_levels[:-1]
    e_in = np.empty(n, dtype=np.int64)
    e_in[0] = CENTER
    e_in[1:] = target[:-1]
    return UtteranceArrays(
        clean=x, noisy_levels=noisy_levels, prediction=prediction,
        s_in=s_in, p_in=p_in, e_in=e_in, target=target, features=features,
    )


@dataclass
class TrainingSequence:
    """One fixed-length chunk: features with conv context, level streams."""

    features: np.ndarray   # (seq_frames + 4, 20) float32, zero-padded edges
    s_in: np.ndarray
    p_in: np.ndarray
    e_in: np.ndarray
    target: np.ndarray
    noise_amplitude: int


def sequence_noise(n_frames: int, seq_frames: int, noise_max: int,
                   rng: np.random.Generator):
    """Per-sample noise with a fresh amplitude drawn for every sequence."""
    n = n_frames * audio.FRAME_SIZE
    seq_samples = seq_frames * audio.FRAME_SIZE
    noise = np.zeros(n, dtype=np.int64)
    amplitudes = []
    for start in range(0, n, seq_samples):
        amp = int(rng.integers(0, noise_max + 1))
        amplitudes.append(amp)
        stop = min(start + seq_samples, n)
        if amp:
            noise[start:stop] = rng.integers(-amp, amp + 1, size=stop - start)
    return noise, amplitudes


def slice_sequences(arrays: UtteranceArrays, seq_frames: int,
                    amplitudes) -> list:
    n_frames = arrays.features.shape[0]
    padded = np.zeros((n_frames + 2 * CONTEXT, audio.NB_FEATURES),
                      dtype=np.float32)
    padded[CONTEXT:CONTEXT + n_frames] = arrays.features
    out = []
    seq_samples = seq_frames * audio.FRAME_SIZE
    for idx, f0 in enumerate(range(0, n_frames - seq_frames + 1, seq_frames)):
        s0 = f0 * audio.FRAME_SIZE
        out.append(TrainingSequence(
            features=padded[f0:f0 + seq_frames + 2 * CONTEXT],
            s_in=arrays.s_in[s0:s0 + seq_samples],
            p_in=arrays.p_in[s0:s0 + seq_samples],
            e_in=arrays.e_in[s0:s0 + seq_samples],
            target=arrays.target[s0:s0 + seq_samples],
            noise_amplitude=amplitudes[idx] if idx < len(amplitudes) else 0,
        ))
    return out


def build_dataset(wav_dir, seq_frames: int = 15, noise_max: int = 3,
                  seed: int = 0) -> list:
    """TrainingSequence list from every WAV file under `wav_dir`."""
    rng = np.random.default_rng(seed)
    sequences = []
    paths = sorted(Path(wav_dir).glob("*.wav"))
    if not paths:
        raise FileNotFoundError(f"no WAV files under {wav_dir}")
    for path in paths:
        samples = audio.read_wav(path)
        features = engine_features(path)
        if features.shape[0] < seq_frames:
            continue
        noise, amplitudes = sequence_noise(features.shape[0], seq_frames,
                                           noise_max, rng)
        arrays = build_utterance(samples, features, noise)
        sequences.extend(slice_sequences(arrays, seq_frames, amplitudes))
    return sequences
