"""End-to-end synthesis: per-frame setup, per-sample loop, streaming API.

Per frame: conditioning vector, its cached gate contributions, and the
predictor from the frame's cepstrum.  Per sample: predict, one network
step, sharpen/floor/draw, excitation decode, signal reconstruction, state
updates.  Synthesis runs in the pre-emphasis domain; only the emitted
audio is de-emphasized, and the predictor history keeps the mu-law
quantized reconstruction so inference matches the quantized training path.

The streaming API delays output by two frames (the conv lookahead) and
pads the tail with zero-feature frames, which makes frame-by-frame and
whole-sequence synthesis bit-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import io as lpcio
from .dsp import (
    FRAME_SIZE,
    NB_BANDS,
    NB_FEATURES,
    EmphasisState,
    deemphasize,
    features_from_audio,
    mulaw_decode,
    mulaw_encode,
)
from .lpc import LpcState, cepstrum_to_lpc, predict, update_history
from .model import (
    Model,
    frame_rate_forward,
    frame_setup,
    model_flops_per_sample,
    sample_rate_logits,
)
from .nn import softmax
from .sampler import SamplerConfig, _sharpen_and_floor, draw, temperature

LOOKAHEAD_FRAMES = 2
CENTER_LEVEL = 128


@dataclass
class SynthesisReport:
    frames: int
    samples: int
    wall_time: float
    real_time_factor: float
    floor_fallbacks: int
    flops_per_sample: float

    def __str__(self):
        rate = self.samples / self.wall_time if self.wall_time > 0 else float("inf")
        return (
            f"frames: {self.frames}\n"
            f"samples: {self.samples}\n"
            f"wall time: {self.wall_time:.3f} s\n"
            f"rate: {rate:.0f} samples/s\n"
            f"real-time factor: {self.real_time_factor:.3f}\n"
            f"floor fallbacks: {self.floor_fallbacks}\n"
            f"flops/sample (weights): {self.flops_per_sample:.0f}"
        )


class SynthStream:
    """Single-stream synthesis state; strictly sequential per stream."""

    def __init__(self, model: Model, config: SamplerConfig | None = None,
                 record_trace: bool = False):
        self.model = model
        self.config = config or SamplerConfig()
        self.rng = self.config.make_rng()
        self.h_a = np.zeros(model.n_a, dtype=np.float32)
        self.h_b = np.zeros(model.n_b, dtype=np.float32)
        self.lpc = LpcState()
        self.deemph = EmphasisState()
        self.s_prev = CENTER_LEVEL
        self.e_prev = CENTER_LEVEL
        self.floor_fallbacks = 0
        self.samples_emitted = 0
        # Feature window for the conv lookahead, primed with two zero frames.
        self._window = [np.zeros(NB_FEATURES, dtype=np.float32)] * LOOKAHEAD_FRAMES
        self._pushed = 0
        self._closed = False
        self.trace = [] if record_trace else None

    # -- frame synthesis ----------------------------------------------------

    def synthesize_frame(self, window: np.ndarray) -> np.ndarray:
        """Synthesize 160 samples for the center frame of a 5-frame window."""
        window = np.asarray(window, dtype=np.float32)
        center = window[2]
        f = frame_rate_forward(self.model.frame, window)
        g = frame_setup(self.model.sample, f)
        self.lpc.set_coeffs(cepstrum_to_lpc(center[:NB_BANDS].astype(np.float64)))
        c = temperature(center[NB_BANDS + 1], self.config.temp_scale)

        sp = self.model.sample
        out = np.empty(FRAME_SIZE)
        for i in range(FRAME_SIZE):
            p_t = predict(self.lpc)
            p_level = mulaw_encode(p_t)
            logits, self.h_a, self.h_b = sample_rate_logits(
                sp, self.h_a, self.h_b, self.s_prev, p_level, self.e_prev, g
            )
            dist, fell_back = _sharpen_and_floor(
                softmax(logits), c, self.config.floor
            )
            if fell_back:
                self.floor_fallbacks += 1
            e_level = draw(dist, self.rng)
            e_t = mulaw_decode(e_level)
            s_t = p_t + e_t
            s_level = mulaw_encode(s_t)
            update_history(self.lpc, mulaw_decode(s_level))
            self.s_prev = s_level
            self.e_prev = e_level
            out[i] = s_t
            if self.trace is not None:
                self.trace.append((p_t, e_level, s_t))
        self.samples_emitted += FRAME_SIZE
        return deemphasize(out, self.deemph)

    # -- streaming ----------------------------------------------------------

    def push(self, features) -> np.ndarray:
        """Feed one feature frame; returns 0 or 160 samples (2-frame delay)."""
        if self._closed:
            raise RuntimeError("stream already flushed")
        return self._advance(np.asarray(features, dtype=np.float32))

    def flush(self) -> np.ndarray:
        """Pad the tail with zero-feature frames and emit the delayed audio."""
        if self._closed:
            raise RuntimeError("stream already flushed")
        self._closed = True
        zero = np.zeros(NB_FEATURES, dtype=np.float32)
        chunks = [self._advance(zero) for _ in range(LOOKAHEAD_FRAMES)]
        return np.concatenate(chunks) if chunks else np.zeros(0)

    def _advance(self, features: np.ndarray) -> np.ndarray:
        if features.shape != (NB_FEATURES,):
            raise ValueError(f"expected {NB_FEATURES} features, got {features.shape}")
        self._window.append(features)
        if len(self._window) > 5:
            self._window.pop(0)
        self._pushed += 1
        if self._pushed < 1 + LOOKAHEAD_FRAMES:
            return np.zeros(0)
        return self.synthesize_frame(np.stack(self._window))


def synthesize(model: Model, features, config: SamplerConfig | None = None):
    """Synthesize a whole (n, 20) feature matrix; returns n*160 samples."""
    feats = np.asarray(features, dtype=np.float32)
    stream = SynthStream(model, config)
    chunks = [stream.push(row) for row in feats]
    chunks.append(stream.flush())
    chunks = [c for c in chunks if c.size]
    return np.concatenate(chunks) if chunks else np.zeros(0)


def copy_synthesis(model: Model, audio, config: SamplerConfig | None = None):
    """Analyze real audio and re-synthesize it (vocoder round trip)."""
    return synthesize(model, features_from_audio(audio), config)


def copy_synthesis_file(model: Model, wav_in, wav_out,
                        config: SamplerConfig | None = None) -> int:
    audio = lpcio.read_wav(wav_in)
    out = copy_synthesis(model, audio, config)
    lpcio.write_wav(wav_out, out)
    return out.size


def bench(model: Model, frames: int = 1000, warmup: int = 100, runs: int = 5,
          seed: int = 0) -> SynthesisReport:
    """Timed synthesis of random-ish features; median wall time of `runs`."""
    rng = np.random.default_rng(seed)
    feats = np.zeros((frames, NB_FEATURES), dtype=np.float32)
    feats[:, :NB_BANDS] = rng.normal(0.0, 0.3, size=(frames, NB_BANDS))
    feats[:, NB_BANDS] = rng.uniform(-1.0, 1.0, size=frames)
    feats[:, NB_BANDS + 1] = rng.uniform(0.0, 1.0, size=frames)

    warm_stream = SynthStream(model, SamplerConfig(seed=seed))
    for row in feats[:warmup]:
        warm_stream.push(row)

    times = []
    fallbacks = 0
    for _ in range(max(1, runs)):
        stream = SynthStream(model, SamplerConfig(seed=seed))
        t0 = time.perf_counter()
        for row in feats:
            stream.push(row)
        stream.flush()
        times.append(time.perf_counter() - t0)
        fallbacks = stream.floor_fallbacks
    wall = float(np.median(times))
    samples = frames * FRAME_SIZE
    rate = samples / wall
    return SynthesisReport(
        frames=frames,
        samples=samples,
        wall_time=wall,
        real_time_factor=16000.0 / rate,
        floor_fallbacks=fallbacks,
        flops_per_sample=model_flops_per_sample(model),
    )
