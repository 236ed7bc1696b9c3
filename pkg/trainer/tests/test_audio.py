"""Trainer-side DSP math must track the engine's documented formulas."""

import numpy as np

from lpcnet_trainer import audio

# the engine package is the oracle for the shared normative math
import lpcnet
from lpcnet import lpc as engine_lpc


def test_mulaw_matches_engine():
    xs = np.linspace(-1.2, 1.2, 4001)
    assert np.array_equal(audio.mulaw_encode(xs), lpcnet.mulaw_encode(xs))
    levels = np.arange(256)
    assert np.allclose(audio.mulaw_decode(levels), lpcnet.mulaw_decode(levels))


def test_preemphasis_matches_engine():
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.5, 0.5, 1000)
    assert np.allclose(audio.preemphasize(x),
                       lpcnet.preemphasize(x, lpcnet.EmphasisState()))


def test_cepstrum_to_lpc_matches_engine():
    rng = np.random.default_rng(1)
    for _ in range(20):
        ceps = rng.normal(0, 1.0, 18)
        assert np.allclose(audio.cepstrum_to_lpc(ceps),
                           engine_lpc.cepstrum_to_lpc(ceps), atol=1e-12)


def test_wav_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    x = rng.uniform(-0.9, 0.9, 3200)
    path = tmp_path / "t.wav"
    audio.write_wav(path, x)
    y = audio.read_wav(path)
    assert y.shape == x.shape
    assert np.max(np.abs(y - x)) < 1.0 / 32768
