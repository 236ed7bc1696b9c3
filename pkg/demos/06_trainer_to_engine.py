"""Trainer-to-engine round trip (requires the trainer package and torch).

Initializes the trainable topology, exports it through the binary weight
format, loads it back in the inference engine, and confirms both sides
compute the same logits.  This is the contract that lets the two packages
evolve independently: the weight file is the only thing they share.
"""

import tempfile

import numpy as np
import torch

from lpcnet_trainer.export import export_model
from lpcnet_trainer.net import VocoderModel
from lpcnet_trainer.sparsify import BlockSparsifier, SparsifyConfig

from lpcnet import model as engine_model

torch.manual_seed(0)
model = VocoderModel(n_a=128, n_b=16, d_embed=64)

# Jump the sparsification schedule straight to its end point so the export
# carries real block structure.
sparsifier = BlockSparsifier(
    model.sample_net.w_a,
    SparsifyConfig(start_update=0, end_update=1, target_density=0.1,
                   rerank_interval=1),
)
sparsifier.step(1)
print(f"trainer-side density: {sparsifier.density():.4f}")

with tempfile.NamedTemporaryFile(suffix=".bin") as tmp:
    export_model(model, tmp.name, sparsifier=sparsifier)
    engine = engine_model.load_model(tmp.name)

print(f"engine-side density:  {engine_model.gru_a_density(engine):.4f}")

# Probe both implementations with the same state and inputs.
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(100):
    h_a = rng.uniform(-0.9, 0.9, 128).astype(np.float32)
    h_b = rng.uniform(-0.9, 0.9, 16).astype(np.float32)
    f = rng.normal(0, 0.5, 128).astype(np.float32)
    s, p, e = (int(v) for v in rng.integers(0, 256, 3))
    g = engine_model.frame_setup(engine.sample, f)
    engine_logits, _, _ = engine_model.sample_rate_logits(
        engine.sample, h_a, h_b, s, p, e, g)
    torch_logits, _, _ = model.sample_net.sample_step(
        torch.from_numpy(h_a), torch.from_numpy(h_b), s, p, e,
        torch.from_numpy(f))
    worst = max(worst, float(np.max(np.abs(
        engine_logits - torch_logits.numpy()))))

print(f"worst logit disagreement over 100 probes: {worst:.2e}")
print("training loop itself: python -m lpcnet_trainer train --help")
