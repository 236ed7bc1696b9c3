"""Streaming neural vocoder with a linear-prediction front end.

16 kHz speech from 20 acoustic features per 10 ms frame: band-cepstral
analysis and open-loop pitch estimation, cepstrum-derived linear
prediction, a block-sparse recurrent sample-rate network with folded
embeddings, and pitch-adaptive categorical sampling.
"""

from .dsp import (
    FRAME_SIZE,
    NB_BANDS,
    NB_FEATURES,
    SAMPLE_RATE,
    EmphasisState,
    FeatureFrame,
    analyze_frame,
    deemphasize,
    features_from_audio,
    mulaw_decode,
    mulaw_encode,
    preemphasize,
)
from .errors import LpcnetError
from .io import read_features, read_wav, write_features, write_wav
from .lpc import LPC_ORDER, LpcState, cepstrum_to_lpc, levinson_durbin
from .model import (
    Model,
    complexity_gflops,
    load_model,
    random_model,
    save_model,
)
from .sampler import SamplerConfig, draw, sharpen_and_floor, temperature
from .synth import (
    SynthStream,
    SynthesisReport,
    bench,
    copy_synthesis,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "FRAME_SIZE", "NB_BANDS", "NB_FEATURES", "SAMPLE_RATE",
    "EmphasisState", "FeatureFrame", "analyze_frame", "deemphasize",
    "features_from_audio", "mulaw_decode", "mulaw_encode", "preemphasize",
    "LpcnetError",
    "read_features", "read_wav", "write_features", "write_wav",
    "LPC_ORDER", "LpcState", "cepstrum_to_lpc", "levinson_durbin",
    "Model", "complexity_gflops", "load_model", "random_model", "save_model",
    "SamplerConfig", "draw", "sharpen_and_floor", "temperature",
    "SynthStream", "SynthesisReport", "bench", "copy_synthesis", "synthesize",
]
