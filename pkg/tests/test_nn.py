"""Dense/sparse products, GRU cell, convolution, dual FC, softmax."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpcnet import nn


def random_block_sparse(rng, rows=None, cols=None, density=0.1):
    rows = rows or 16 * int(rng.integers(1, 8))
    cols = cols or int(rng.integers(1, 100))
    grid = (rows // 16) * cols
    n_blocks = min(grid, max(0, round(density * rows * cols / 16)))
    chosen = rng.choice(grid, size=n_blocks, replace=False)
    index = np.stack([(chosen // cols) * 16, chosen % cols], axis=1)
    values = rng.normal(0, 0.2, size=(n_blocks, 16)).astype(np.float32)
    diag_n = min(rows, cols)
    for b, (r, c) in enumerate(index):
        if c < diag_n and r <= c < r + 16:
            values[b, c - r] = 0.0
    diag = rng.normal(size=diag_n).astype(np.float32)
    return nn.BlockSparseMatrix(rows=rows, cols=cols, block_index=index,
                                block_values=values, diag=diag)


class TestDenseGemv:
    def test_identity(self):
        x = np.arange(5.0)
        assert np.array_equal(nn.dense_gemv(np.eye(5), x), x)

    def test_zero_matrix(self):
        assert np.array_equal(nn.dense_gemv(np.zeros((4, 3)), np.ones(3)),
                              np.zeros(4))

    def test_matches_naive_loop(self):
        # Weight-like scaling (1/sqrt(n)) keeps outputs O(1) so the absolute
        # tolerance is meaningful at float32 precision.
        rng = np.random.default_rng(0)
        m = (rng.normal(size=(384, 384)) / np.sqrt(384)).astype(np.float32)
        x = rng.normal(size=384).astype(np.float32)
        naive = np.array([
            sum(float(m[i, j]) * float(x[j]) for j in range(384))
            for i in range(384)
        ])
        assert np.max(np.abs(nn.dense_gemv(m, x) - naive)) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            nn.dense_gemv(np.zeros((3, 4)), np.zeros(5))


class TestBlockSparse:
    def test_diagonal_only(self):
        d = np.array([1.0, 2.0, 3.0, 4.0], dtype=np.float32)
        m = nn.BlockSparseMatrix(rows=16, cols=4,
                                 block_index=np.zeros((0, 2)),
                                 block_values=np.zeros((0, 16)), diag=d)
        x = np.array([1.0, 1.0, 2.0, 0.5], dtype=np.float32)
        expected = np.zeros(16, dtype=np.float32)
        expected[:4] = d * x
        assert np.allclose(nn.sparse_gemv(m, x), expected)

    def test_single_block_geometry(self):
        diag = np.zeros(16, dtype=np.float32)
        diag[5] = 2.5
        m = nn.BlockSparseMatrix(
            rows=16, cols=16, block_index=[[0, 5]],
            block_values=np.concatenate([
                np.ones(5), [0.0], np.ones(10)]).astype(np.float32),
            diag=diag,
        )
        x = np.zeros(16, dtype=np.float32)
        x[5] = 1.0
        y = nn.sparse_gemv(m, x)
        expected = np.ones(16, dtype=np.float32)
        expected[5] = 2.5  # diagonal replaces the in-block zero
        assert np.allclose(y, expected)

    def test_matches_densified(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            m = random_block_sparse(rng, density=rng.uniform(0.05, 0.5))
            x = rng.normal(0, 0.5, size=m.cols).astype(np.float32)
            dense = nn.dense_gemv(m.densify(), x)
            assert np.max(np.abs(nn.sparse_gemv(m, x) - dense)) < 1e-6

    def test_validation_rejects_bad_blocks(self):
        ok = dict(rows=32, cols=8, block_values=np.zeros((1, 16)),
                  diag=np.zeros(8))
        with pytest.raises(ValueError):
            nn.BlockSparseMatrix(block_index=[[8, 0]], **ok)  # not multiple of 16
        with pytest.raises(ValueError):
            nn.BlockSparseMatrix(block_index=[[32, 0]], **ok)  # out of bounds
        with pytest.raises(ValueError):
            nn.BlockSparseMatrix(block_index=[[0, 9]], **ok)  # column oob
        with pytest.raises(ValueError):
            nn.BlockSparseMatrix(
                rows=32, cols=8, block_index=[[0, 1], [0, 1]],
                block_values=np.zeros((2, 16)), diag=np.zeros(8))  # duplicate

    def test_validation_rejects_nonzero_on_diagonal(self):
        with pytest.raises(ValueError):
            nn.BlockSparseMatrix(
                rows=16, cols=16, block_index=[[0, 3]],
                block_values=np.ones((1, 16), dtype=np.float32),
                diag=np.zeros(16))

    def test_structural_density(self):
        m = nn.BlockSparseMatrix(rows=32, cols=32,
                                 block_index=np.zeros((0, 2)),
                                 block_values=np.zeros((0, 16)),
                                 diag=np.ones(32))
        assert m.structural_density() == pytest.approx(32 / 1024)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        m = random_block_sparse(rng)
        x = rng.normal(size=m.cols).astype(np.float32)
        assert np.array_equal(nn.sparse_gemv(m, x), nn.sparse_gemv(m, x))


def gru_reference(p, h_prev, extra):
    """Straight transcription of the cell equations, float64."""
    w = lambda m: m.densify() if isinstance(m, nn.BlockSparseMatrix) else m
    h = np.asarray(h_prev, dtype=np.float64)
    u = 1 / (1 + np.exp(-(w(p.w_u).astype(np.float64) @ h + extra[0] + p.b_u)))
    r = 1 / (1 + np.exp(-(w(p.w_r).astype(np.float64) @ h + extra[1] + p.b_r)))
    hbar = np.tanh(r * (w(p.w_h).astype(np.float64) @ h) + extra[2] + p.b_h)
    return u * h + (1 - u) * hbar


def random_gru(rng, n, with_inputs=False, input_dim=None):
    mk = lambda *s: rng.normal(0, 0.4, size=s).astype(np.float32)
    kw = {}
    if with_inputs:
        kw = dict(u_u=mk(n, input_dim), u_r=mk(n, input_dim),
                  u_h=mk(n, input_dim))
    return nn.GruParams(w_u=mk(n, n), w_r=mk(n, n), w_h=mk(n, n),
                        b_u=mk(n), b_r=mk(n), b_h=mk(n), **kw)


class TestGruStep:
    def test_all_zero_weights(self):
        n = 8
        zeros = np.zeros((n, n), dtype=np.float32)
        zb = np.zeros(n, dtype=np.float32)
        p = nn.GruParams(w_u=zeros, w_r=zeros, w_h=zeros,
                         b_u=zb, b_r=zb, b_h=zb)
        h = np.linspace(-0.5, 0.5, n).astype(np.float32)
        out = nn.gru_step(p, h, (zb, zb, zb))
        assert np.allclose(out, 0.5 * h)

    def test_input_terms_only(self):
        n = 6
        zeros = np.zeros((n, n), dtype=np.float32)
        zb = np.zeros(n, dtype=np.float32)
        p = nn.GruParams(w_u=zeros, w_r=zeros, w_h=zeros,
                         b_u=zb, b_r=zb, b_h=zb)
        rng = np.random.default_rng(3)
        t_u, t_r, t_h = (rng.normal(size=n) for _ in range(3))
        out = nn.gru_step(p, np.zeros(n, dtype=np.float32), (t_u, t_r, t_h))
        sig = 1 / (1 + np.exp(-t_u))
        assert np.allclose(out, (1 - sig) * np.tanh(t_h))

    def test_matches_formula_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            p = random_gru(rng, 16)
            h = rng.uniform(-1, 1, 16).astype(np.float32)
            extra = tuple(rng.normal(0, 0.5, 16) for _ in range(3))
            assert np.max(np.abs(
                nn.gru_step(p, h, extra) - gru_reference(p, h, extra)
            )) < 1e-6

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_state_stays_bounded(self, seed):
        rng = np.random.default_rng(seed)
        p = random_gru(rng, 8)
        h = rng.uniform(-1, 1, 8).astype(np.float32)
        extra = tuple(rng.normal(0, 2.0, 8) for _ in range(3))
        out = nn.gru_step(p, h, extra)
        assert np.all(np.abs(out) < 1.0)

    def test_input_terms_helper(self):
        rng = np.random.default_rng(5)
        p = random_gru(rng, 8, with_inputs=True, input_dim=12)
        x = rng.normal(size=12).astype(np.float32)
        terms = p.input_terms(x)
        assert np.allclose(terms[0], p.u_u @ x)
        assert np.allclose(terms[2], p.u_h @ x)


class TestDualFc:
    def test_zero_weighting(self):
        p = nn.DualFcParams(w1=np.ones((4, 3), dtype=np.float32),
                            w2=np.ones((4, 3), dtype=np.float32),
                            a1=np.zeros(4, dtype=np.float32),
                            a2=np.zeros(4, dtype=np.float32))
        assert np.array_equal(nn.dual_fc(p, np.ones(3)), np.zeros(4))

    def test_single_branch(self):
        rng = np.random.default_rng(6)
        w1 = rng.normal(size=(5, 3)).astype(np.float32)
        a1 = rng.normal(size=5).astype(np.float32)
        p = nn.DualFcParams(w1=w1, w2=np.zeros_like(w1), a1=a1,
                            a2=rng.normal(size=5).astype(np.float32))
        x = rng.normal(size=3).astype(np.float32)
        assert np.allclose(nn.dual_fc(p, x), a1 * np.tanh(w1 @ x))

    def test_matches_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            w1 = rng.normal(size=(10, 6)).astype(np.float32)
            w2 = rng.normal(size=(10, 6)).astype(np.float32)
            a1 = rng.normal(size=10).astype(np.float32)
            a2 = rng.normal(size=10).astype(np.float32)
            x = rng.normal(size=6).astype(np.float32)
            p = nn.DualFcParams(w1=w1, w2=w2, a1=a1, a2=a2)
            ref = a1 * np.tanh(w1.astype(np.float64) @ x.astype(np.float64)) \
                + a2 * np.tanh(w2.astype(np.float64) @ x.astype(np.float64))
            assert np.max(np.abs(nn.dual_fc(p, x) - ref)) < 1e-6

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            nn.DualFcParams(w1=np.zeros((4, 3)), w2=np.zeros((5, 3)),
                            a1=np.zeros(4), a2=np.zeros(4))


class TestConv1d:
    def test_zero_weights_bias_through_tanh(self):
        w = np.zeros((4, 3, 3), dtype=np.float32)
        b = np.array([0.1, -0.2, 0.3, 0.0], dtype=np.float32)
        frames = np.random.default_rng(8).normal(size=(6, 3)).astype(np.float32)
        for t in range(6):
            assert np.allclose(nn.conv1d_3(w, b, frames, t), np.tanh(b))

    def test_center_selecting_kernel(self):
        w = np.zeros((3, 3, 3), dtype=np.float32)
        w[:, :, 1] = np.eye(3)
        b = np.zeros(3, dtype=np.float32)
        frames = np.random.default_rng(9).normal(size=(5, 3)).astype(np.float32)
        for t in range(5):
            assert np.allclose(nn.conv1d_3(w, b, frames, t),
                               np.tanh(frames[t]), atol=1e-7)

    def test_matches_sliding_window_oracle(self):
        rng = np.random.default_rng(10)
        w = rng.normal(size=(7, 4, 3)).astype(np.float32)
        b = rng.normal(size=7).astype(np.float32)
        frames = rng.normal(size=(9, 4)).astype(np.float32)
        padded = np.vstack([np.zeros((1, 4)), frames, np.zeros((1, 4))])
        for t in range(9):
            ref = np.tanh(
                w[:, :, 0] @ padded[t] + w[:, :, 1] @ padded[t + 1]
                + w[:, :, 2] @ padded[t + 2] + b
            )
            assert np.max(np.abs(nn.conv1d_3(w, b, frames, t) - ref)) < 1e-6

    def test_streaming_equals_batch(self):
        rng = np.random.default_rng(11)
        w = rng.normal(size=(4, 4, 3)).astype(np.float32)
        b = rng.normal(size=4).astype(np.float32)
        frames = rng.normal(size=(12, 4)).astype(np.float32)
        batch = [nn.conv1d_3(w, b, frames, t) for t in range(12)]
        for t in range(12):
            window = frames[max(0, t - 1):t + 2]
            local_t = t if t == 0 else 1
            assert np.array_equal(nn.conv1d_3(w, b, window, local_t), batch[t])


class TestSoftmax:
    def test_uniform_logits(self):
        out = nn.softmax(np.zeros(256))
        assert np.allclose(out, 1.0 / 256)

    def test_saturation(self):
        x = np.zeros(256)
        x[17] = 50.0
        assert nn.softmax(x)[17] > 0.999999

    def test_sums_to_one(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            out = nn.softmax(rng.normal(0, 10, 256))
            assert abs(np.sum(out) - 1.0) < 1e-9
            assert np.all(out >= 0)
