"""Desk-scale trainer for the streaming vocoder engine.

Builds noise-injected teacher-forcing data from a WAV corpus (features via
the engine's CLI), trains the full topology with AMSGrad and progressive
block sparsification, and exports weights in the engine's binary format.
"""

from .data import build_dataset, build_utterance, engine_features
from .export import export_model, write_weight_file
from .net import FrameRateNet, SampleRateNet, VocoderModel
from .sparsify import BlockSparsifier, SparsifyConfig, density_at
from .train import TrainingConfig, step_size, train

__all__ = [
    "build_dataset", "build_utterance", "engine_features",
    "export_model", "write_weight_file",
    "FrameRateNet", "SampleRateNet", "VocoderModel",
    "BlockSparsifier", "SparsifyConfig", "density_at",
    "TrainingConfig", "step_size", "train",
]
