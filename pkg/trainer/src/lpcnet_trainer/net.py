"""Trainable topology, gate-for-gate identical to the inference engine.

Gate order is (update, reset, candidate); the reset gate multiplies only
the recurrent contribution of the candidate; one bias per gate; the two
conv layers run over a feature sequence zero-padded by two frames per
side, with the residual taken from the first conv's center output; the
output layer is a bias-free weighted pair of tanh projections.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

NB_FEATURES = 20
NB_LEVELS = 256
COND_SIZE = 128
FRAME_SIZE = 160


def _uniform_(tensor: torch.Tensor, fan_in: int) -> None:
    bound = 1.0 / math.sqrt(fan_in)
    nn.init.uniform_(tensor, -bound, bound)


class FrameRateNet(nn.Module):
    """conv3 -> conv3 -> residual -> two dense layers, all tanh."""

    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv1d(NB_FEATURES, COND_SIZE, 3)
        self.conv2 = nn.Conv1d(COND_SIZE, COND_SIZE, 3)
        self.fc1 = nn.Linear(COND_SIZE, COND_SIZE)
        self.fc2 = nn.Linear(COND_SIZE, COND_SIZE)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        """(B, n_frames + 4, 20) zero-padded features -> (B, n_frames, 128)."""
        x = feats.transpose(1, 2)
        c1 = torch.tanh(self.conv1(x))
        c2 = torch.tanh(self.conv2(c1))
        r = (c2 + c1[:, :, 1:-1]).transpose(1, 2)
        return torch.tanh(self.fc2(torch.tanh(self.fc1(r))))


class SampleRateNet(nn.Module):
    """Embedding-fed large GRU, small GRU, dual tanh output layer.

    The three embedded inputs share one embedding matrix; each gate's
    input weights span [emb(s); emb(p); emb(e); conditioning].
    """

    def __init__(self, n_a: int = 384, n_b: int = 16, d_embed: int = 128):
        super().__init__()
        self.n_a, self.n_b, self.d_embed = n_a, n_b, d_embed
        in_dim = 3 * d_embed + COND_SIZE
        self.embed = nn.Embedding(NB_LEVELS, d_embed)
        nn.init.uniform_(self.embed.weight, -0.1, 0.1)

        self.w_a = nn.Parameter(torch.empty(3, n_a, n_a))
        self.u_a = nn.Parameter(torch.empty(3, n_a, in_dim))
        self.b_a = nn.Parameter(torch.zeros(3, n_a))
        self.w_b = nn.Parameter(torch.empty(3, n_b, n_b))
        self.u_b = nn.Parameter(torch.empty(3, n_b, n_a))
        self.b_b = nn.Parameter(torch.zeros(3, n_b))
        self.dual_w1 = nn.Parameter(torch.empty(NB_LEVELS, n_b))
        self.dual_w2 = nn.Parameter(torch.empty(NB_LEVELS, n_b))
        self.dual_a1 = nn.Parameter(torch.ones(NB_LEVELS))
        self.dual_a2 = nn.Parameter(torch.ones(NB_LEVELS))
        for p, fan in [(self.w_a, n_a), (self.u_a, in_dim), (self.w_b, n_b),
                       (self.u_b, n_a), (self.dual_w1, n_b),
                       (self.dual_w2, n_b)]:
            _uniform_(p, fan)

    def gate_inputs(self, s, p, e, f):
        """Non-recurrent gate terms for the large GRU: (..., 3*n_a)."""
        x = torch.cat([self.embed(s), self.embed(p), self.embed(e), f], dim=-1)
        u = self.u_a.reshape(3 * self.n_a, -1)
        return x @ u.T + self.b_a.reshape(-1)

    def _gru_a_step(self, h, rec_w, inp_t):
        n = self.n_a
        rec = h @ rec_w
        z = rec[:, :2 * n] + inp_t[:, :2 * n]
        u = torch.sigmoid(z[:, :n])
        r = torch.sigmoid(z[:, n:])
        hbar = torch.tanh(r * rec[:, 2 * n:] + inp_t[:, 2 * n:])
        return u * h + (1.0 - u) * hbar

    def _gru_b_step(self, h, rec_w, inp_t):
        m = self.n_b
        rec = h @ rec_w
        z = rec[:, :2 * m] + inp_t[:, :2 * m]
        u = torch.sigmoid(z[:, :m])
        r = torch.sigmoid(z[:, m:])
        hbar = torch.tanh(r * rec[:, 2 * m:] + inp_t[:, 2 * m:])
        return u * h + (1.0 - u) * hbar

    def forward(self, f_frames, s, p, e, h_a=None, h_b=None):
        """Teacher-forced sequence run.

        f_frames: (B, n_frames, 128) conditioning; s/p/e: (B, T) levels with
        T = n_frames*160.  Returns (B, T, 256) logits.
        """
        batch, t_total = s.shape
        f = f_frames.repeat_interleave(FRAME_SIZE, dim=1)
        inp_a = self.gate_inputs(s, p, e, f)
        rec_w_a = self.w_a.reshape(3 * self.n_a, self.n_a).T
        if h_a is None:
            h_a = f.new_zeros(batch, self.n_a)
        states = []
        for t in range(t_total):
            h_a = self._gru_a_step(h_a, rec_w_a, inp_a[:, t])
            states.append(h_a)
        h_seq = torch.stack(states, dim=1)

        inp_b = h_seq @ self.u_b.reshape(3 * self.n_b, self.n_a).T \
            + self.b_b.reshape(-1)
        rec_w_b = self.w_b.reshape(3 * self.n_b, self.n_b).T
        if h_b is None:
            h_b = f.new_zeros(batch, self.n_b)
        states_b = []
        for t in range(t_total):
            h_b = self._gru_b_step(h_b, rec_w_b, inp_b[:, t])
            states_b.append(h_b)
        hb_seq = torch.stack(states_b, dim=1)

        return (self.dual_a1 * torch.tanh(hb_seq @ self.dual_w1.T)
                + self.dual_a2 * torch.tanh(hb_seq @ self.dual_w2.T))

    @torch.no_grad()
    def sample_step(self, h_a, h_b, s, p, e, f):
        """Single-step probe used by the cross-engine parity tests."""
        one = lambda level: torch.tensor([level], dtype=torch.long)
        inp = self.gate_inputs(one(s), one(p), one(e), f.reshape(1, -1))
        h_a = self._gru_a_step(h_a.reshape(1, -1),
                               self.w_a.reshape(3 * self.n_a, self.n_a).T, inp)
        inp_b = h_a @ self.u_b.reshape(3 * self.n_b, self.n_a).T \
            + self.b_b.reshape(-1)
        h_b = self._gru_b_step(h_b.reshape(1, -1),
                               self.w_b.reshape(3 * self.n_b, self.n_b).T, inp_b)
        logits = (self.dual_a1 * torch.tanh(h_b @ self.dual_w1.T)
                  + self.dual_a2 * torch.tanh(h_b @ self.dual_w2.T))
        return logits[0], h_a[0], h_b[0]


class VocoderModel(nn.Module):
    """Frame-rate and sample-rate networks trained end to end."""

    def __init__(self, n_a: int = 384, n_b: int = 16, d_embed: int = 128):
        super().__init__()
        self.frame_net = FrameRateNet()
        self.sample_net = SampleRateNet(n_a=n_a, n_b=n_b, d_embed=d_embed)

    def forward(self, features, s, p, e):
        """features: (B, n_frames + 4, 20); s/p/e: (B, n_frames*160)."""
        f_frames = self.frame_net(features)
        return self.sample_net(f_frames, s, p, e)


def batch_tensors(sequences, device="cpu"):
    """Stack TrainingSequence records into model-ready tensors."""
    feats = torch.tensor(
        np.stack([seq.features for seq in sequences]), dtype=torch.float32,
        device=device)
    mk = lambda name: torch.tensor(
        np.stack([getattr(seq, name) for seq in sequences]), dtype=torch.long,
        device=device)
    return feats, mk("s_in"), mk("p_in"), mk("e_in"), mk("target")
