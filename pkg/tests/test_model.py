"""Topology, folded embeddings, weight format, complexity accounting."""

import numpy as np
import pytest

from lpcnet import model as M
from lpcnet import nn
from lpcnet.errors import (
    BadMagicError,
    ChecksumError,
    TensorShapeError,
    TruncatedFileError,
    VersionMismatchError,
)

N_A = 64
N_B = 16


def zero_frame_params(bias2=0.0):
    return M.FrameRateParams(
        conv1_w=np.zeros((128, 20, 3), dtype=np.float32),
        conv1_b=np.zeros(128, dtype=np.float32),
        conv2_w=np.zeros((128, 128, 3), dtype=np.float32),
        conv2_b=np.zeros(128, dtype=np.float32),
        fc1_w=np.zeros((128, 128), dtype=np.float32),
        fc1_b=np.zeros(128, dtype=np.float32),
        fc2_w=np.zeros((128, 128), dtype=np.float32),
        fc2_b=np.full(128, bias2, dtype=np.float32),
    )


class TestFrameRateNetwork:
    def test_zero_weights_give_bias_through_tanh(self):
        p = zero_frame_params(bias2=0.3)
        window = np.random.default_rng(0).normal(size=(5, 20))
        assert np.allclose(M.frame_rate_forward(p, window),
                           np.tanh(0.3) * np.ones(128))

    def test_output_length_is_128(self):
        model = M.random_model(seed=1, n_a=N_A)
        window = np.random.default_rng(1).normal(size=(5, 20))
        assert M.frame_rate_forward(model.frame, window).shape == (128,)

    def test_sequence_equals_per_frame(self):
        model = M.random_model(seed=2, n_a=N_A)
        rng = np.random.default_rng(2)
        feats = rng.normal(size=(7, 20)).astype(np.float32)
        seq = M.conditioning_sequence(model.frame, feats)
        padded = np.zeros((11, 20), dtype=np.float32)
        padded[2:9] = feats
        for t in range(7):
            one = M.frame_rate_forward(model.frame, padded[t:t + 5])
            assert np.array_equal(seq[t], one)

    def test_rejects_bad_window(self):
        model = M.random_model(seed=3, n_a=N_A)
        with pytest.raises(ValueError):
            M.frame_rate_forward(model.frame, np.zeros((4, 20)))


def build_unfolded_parts(rng, n_a=N_A, d=128):
    mk = lambda *s: (rng.normal(size=s) / np.sqrt(s[-1])).astype(np.float32)
    embedding = rng.normal(0, 0.3, size=(256, d)).astype(np.float32)
    u_sub = {(g, i): mk(n_a, d) for g in M.GATES for i in M.EMBED_INPUTS}
    cond = {g: mk(n_a, 128) for g in M.GATES}
    return embedding, u_sub, cond


class TestFoldEmbeddings:
    def test_identity_embedding_keeps_submatrices(self):
        rng = np.random.default_rng(4)
        u_sub = {(g, i): rng.normal(size=(32, 256)).astype(np.float32)
                 for g in M.GATES for i in M.EMBED_INPUTS}
        folded = M.fold_embeddings(np.eye(256, dtype=np.float32), u_sub)
        for key, u in u_sub.items():
            assert np.allclose(folded.v[key], u, atol=1e-6)

    def test_per_level_columns(self):
        rng = np.random.default_rng(5)
        embedding, u_sub, _ = build_unfolded_parts(rng)
        folded = M.fold_embeddings(embedding, u_sub)
        for key in [("u", "s"), ("r", "p"), ("h", "e")]:
            for level in (0, 17, 128, 255):
                expected = u_sub[key].astype(np.float64) @ embedding[level]
                assert np.max(np.abs(folded.v[key][:, level] - expected)) < 1e-6


def build_model_with_unfolded(seed, n_a=N_A, n_b=N_B):
    """Model plus the explicit embedding/submatrix parts for the naive path."""
    rng = np.random.default_rng(seed)
    base = M.random_model(seed=seed, n_a=n_a, n_b=n_b, density=0.2)
    embedding, u_sub, cond = build_unfolded_parts(rng, n_a=n_a)
    sample = M.SampleRateParams(
        gru_a=base.sample.gru_a,
        gru_b=base.sample.gru_b,
        dual=base.sample.dual,
        folded=M.fold_embeddings(embedding, u_sub),
        cond_u=cond["u"], cond_r=cond["r"], cond_h=cond["h"],
    )
    model = M.Model(frame=base.frame, sample=sample)
    return model, embedding, u_sub, cond


def naive_logits(model, embedding, u_sub, cond, h_a, h_b, s, p, e, f):
    """Literal embed-then-multiply evaluation of one sample step."""
    x = np.concatenate([embedding[s], embedding[p], embedding[e], f])
    u_full = {
        g: np.hstack([u_sub[g, "s"], u_sub[g, "p"], u_sub[g, "e"], cond[g]])
        for g in M.GATES
    }
    sp = model.sample
    extra = tuple(u_full[g] @ x for g in M.GATES)
    h_a = nn.gru_step(sp.gru_a, h_a, extra)
    h_b = nn.gru_step(sp.gru_b, h_b, sp.gru_b.input_terms(h_a))
    return nn.dual_fc(sp.dual, h_b), h_a, h_b


class TestFoldedEquivalence:
    def test_folded_matches_naive_over_run(self):
        model, embedding, u_sub, cond = build_model_with_unfolded(seed=6)
        rng = np.random.default_rng(6)
        h_a_f = np.zeros(N_A, dtype=np.float32)
        h_b_f = np.zeros(N_B, dtype=np.float32)
        h_a_n, h_b_n = h_a_f.copy(), h_b_f.copy()
        worst = 0.0
        for step in range(1000):
            if step % 160 == 0:
                f = rng.normal(0, 0.5, 128).astype(np.float32)
                g = M.frame_setup(model.sample, f)
            s, p, e = rng.integers(0, 256, 3)
            fast, h_a_f, h_b_f = M.sample_rate_logits(
                model.sample, h_a_f, h_b_f, s, p, e, g)
            ref, h_a_n, h_b_n = naive_logits(
                model, embedding, u_sub, cond, h_a_n, h_b_n, s, p, e, f)
            worst = max(worst, float(np.max(np.abs(fast - ref))))
        assert worst < 1e-5, worst


class TestFrameSetup:
    def test_zero_conditioning_gives_zero(self):
        model = M.random_model(seed=7, n_a=N_A)
        g = M.frame_setup(model.sample, np.zeros(128, dtype=np.float32))
        assert np.array_equal(g.g_u, np.zeros(N_A))
        assert np.array_equal(g.stacked, np.zeros(3 * N_A))

    def test_linearity(self):
        model = M.random_model(seed=8, n_a=N_A)
        f = np.random.default_rng(8).normal(size=128).astype(np.float32)
        g1 = M.frame_setup(model.sample, f)
        g2 = M.frame_setup(model.sample, 2.0 * f)
        assert np.allclose(2.0 * g1.stacked, g2.stacked, atol=1e-5)

    def test_cached_equals_recomputation(self):
        model = M.random_model(seed=9, n_a=N_A)
        f = np.random.default_rng(9).normal(size=128).astype(np.float32)
        g = M.frame_setup(model.sample, f)
        for _ in range(5):
            again = M.frame_setup(model.sample, f)
            assert np.array_equal(g.stacked, again.stacked)


class TestSampleRateStep:
    def test_distribution_is_normalized(self):
        model = M.random_model(seed=10, n_a=N_A)
        rng = np.random.default_rng(10)
        g = M.frame_setup(model.sample, rng.normal(size=128).astype(np.float32))
        h_a = np.zeros(N_A, dtype=np.float32)
        h_b = np.zeros(N_B, dtype=np.float32)
        for _ in range(20):
            s, p, e = rng.integers(0, 256, 3)
            dist, h_a, h_b = M.sample_rate_step(model.sample, h_a, h_b,
                                                s, p, e, g)
            assert abs(np.sum(dist) - 1.0) < 1e-6
            assert np.all(dist >= 0)

    def test_zero_weights_give_uniform(self):
        z = np.zeros
        f32 = np.float32
        n = 32
        gru_a = nn.GruParams(
            w_u=z((n, n), f32), w_r=z((n, n), f32), w_h=z((n, n), f32),
            b_u=z(n, f32), b_r=z(n, f32), b_h=z(n, f32))
        gru_b = nn.GruParams(
            w_u=z((16, 16), f32), w_r=z((16, 16), f32), w_h=z((16, 16), f32),
            b_u=z(16, f32), b_r=z(16, f32), b_h=z(16, f32),
            u_u=z((16, n), f32), u_r=z((16, n), f32), u_h=z((16, n), f32))
        folded = M.FoldedEmbeddings(
            {(g, i): z((n, 256), f32) for g in M.GATES for i in M.EMBED_INPUTS})
        dual = nn.DualFcParams(w1=z((256, 16), f32), w2=z((256, 16), f32),
                               a1=z(256, f32), a2=z(256, f32))
        sample = M.SampleRateParams(
            gru_a=gru_a, gru_b=gru_b, dual=dual, folded=folded,
            cond_u=z((n, 128), f32), cond_r=z((n, 128), f32),
            cond_h=z((n, 128), f32))
        g = M.frame_setup(sample, z(128, f32))
        dist, _, _ = M.sample_rate_step(sample, z(n, f32), z(16, f32),
                                        128, 128, 128, g)
        assert np.allclose(dist, 1.0 / 256)

    def test_deterministic(self):
        model = M.random_model(seed=11, n_a=N_A)
        g = M.frame_setup(model.sample, np.ones(128, dtype=np.float32))
        h_a = np.full(N_A, 0.1, dtype=np.float32)
        h_b = np.full(N_B, -0.1, dtype=np.float32)
        out1 = M.sample_rate_step(model.sample, h_a.copy(), h_b.copy(),
                                  3, 77, 200, g)
        out2 = M.sample_rate_step(model.sample, h_a.copy(), h_b.copy(),
                                  3, 77, 200, g)
        assert np.array_equal(out1[0], out2[0])
        assert np.array_equal(out1[1], out2[1])

    def test_fast_path_matches_gru_step_composition(self):
        model, embedding, u_sub, cond = build_model_with_unfolded(seed=12)
        rng = np.random.default_rng(12)
        sp = model.sample
        h_a = rng.uniform(-0.5, 0.5, N_A).astype(np.float32)
        h_b = rng.uniform(-0.5, 0.5, N_B).astype(np.float32)
        f = rng.normal(size=128).astype(np.float32)
        g = M.frame_setup(sp, f)
        s, p, e = 10, 130, 250
        fast, h_a2, h_b2 = M.sample_rate_logits(sp, h_a, h_b, s, p, e, g)
        extra = tuple(
            sp.folded.v[gate, "s"][:, s] + sp.folded.v[gate, "p"][:, p]
            + sp.folded.v[gate, "e"][:, e] + getattr(g, f"g_{gate}")
            for gate in M.GATES
        )
        h_a_ref = nn.gru_step(sp.gru_a, h_a, extra)
        h_b_ref = nn.gru_step(sp.gru_b, h_b, sp.gru_b.input_terms(h_a_ref))
        ref = nn.dual_fc(sp.dual, h_b_ref)
        assert np.max(np.abs(fast - ref)) < 1e-6
        assert np.max(np.abs(h_a2 - h_a_ref)) < 1e-6
        assert np.max(np.abs(h_b2 - h_b_ref)) < 1e-6


class TestWeightFile:
    def test_round_trip_bit_identical(self, tmp_path):
        model = M.random_model(seed=13, n_a=N_A)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        loaded = M.load_model(path)
        saved = dict(M._tensor_items(model))
        reloaded = dict(M._tensor_items(loaded))
        assert set(saved) == set(reloaded)
        for name, a in saved.items():
            b = reloaded[name]
            if isinstance(a, nn.BlockSparseMatrix):
                assert np.array_equal(a.block_index, b.block_index), name
                assert np.array_equal(a.block_values, b.block_values), name
                assert np.array_equal(a.diag, b.diag), name
            else:
                assert np.array_equal(np.asarray(a, dtype=np.float32), b), name

    def test_truncated_file_names_expected_bytes(self, tmp_path):
        model = M.random_model(seed=14, n_a=N_A)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        data = path.read_bytes()
        (tmp_path / "t.bin").write_bytes(data[:len(data) // 2])
        with pytest.raises(TruncatedFileError, match="expected at least"):
            M.load_model(tmp_path / "t.bin")

    def test_checksum_flip(self, tmp_path):
        model = M.random_model(seed=15, n_a=N_A)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        (tmp_path / "c.bin").write_bytes(bytes(data))
        with pytest.raises(ChecksumError, match="checksum"):
            M.load_model(tmp_path / "c.bin")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(BadMagicError):
            M.load_model(path)

    def test_version_mismatch(self, tmp_path):
        model = M.random_model(seed=16, n_a=N_A)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        data = bytearray(path.read_bytes())
        data[4] = 99
        # keep the checksum consistent so the version check is what fires
        import zlib
        data[-4:] = zlib.crc32(bytes(data[:-4])).to_bytes(4, "little")
        (tmp_path / "v.bin").write_bytes(bytes(data))
        with pytest.raises(VersionMismatchError):
            M.load_model(tmp_path / "v.bin")

    def test_missing_tensor_named(self, tmp_path):
        model = M.random_model(seed=17, n_a=N_A)
        items = [(n, t) for n, t in M._tensor_items(model)
                 if n != "dual_fc.a2"]
        path = tmp_path / "m.bin"
        M.write_weight_file(path, items, M.FLAG_FOLDED)
        with pytest.raises(TensorShapeError, match="dual_fc.a2"):
            M.load_model(path)

    def test_dimension_inconsistency_named(self, tmp_path):
        model = M.random_model(seed=18, n_a=N_A)
        items = []
        for n, t in M._tensor_items(model):
            if n == "gru_b.u_u":
                t = np.zeros((16, N_A + 16), dtype=np.float32)
            items.append((n, t))
        path = tmp_path / "d.bin"
        M.write_weight_file(path, items, M.FLAG_FOLDED)
        with pytest.raises(TensorShapeError, match="gru_b.u_u"):
            M.load_model(path)

    def test_unfolded_file_folds_at_load(self, tmp_path):
        model, embedding, u_sub, cond = build_model_with_unfolded(seed=19)
        items = [(n, t) for n, t in M._tensor_items(model)
                 if not n.startswith("gru_a.v_")]
        items.append(("embed.e", embedding))
        for g in M.GATES:
            for i in M.EMBED_INPUTS:
                items.append((f"gru_a.u_{g}_{i}", u_sub[g, i]))
        path = tmp_path / "u.bin"
        M.write_weight_file(path, items, flags=0)
        loaded = M.load_model(path)
        for g in M.GATES:
            for i in M.EMBED_INPUTS:
                assert np.array_equal(loaded.sample.folded.v[g, i],
                                      model.sample.folded.v[g, i])

    def test_density_preserved(self, tmp_path):
        model = M.random_model(seed=20, n_a=384, density=0.1)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        loaded = M.load_model(path)
        assert abs(M.gru_a_density(loaded) - 0.1) < 0.01

    def test_describe_tensors(self, tmp_path):
        model = M.random_model(seed=21, n_a=N_A)
        path = tmp_path / "w.bin"
        M.save_model(model, path)
        recs = {r["name"]: r for r in M.describe_tensors(path)}
        assert recs["gru_a.w_u"]["kind"] == "block-sparse"
        assert recs["gru_a.w_u"]["shape"] == (N_A, N_A)
        assert recs["frame.fc1.w"]["kind"] == "dense"
        assert len(recs) == 39


class TestComplexity:
    def test_reference_operating_point(self):
        c = M.complexity_gflops(384, 16, 256, 0.1, 16000)
        assert c == pytest.approx(2.2921216)

    def test_degenerate_zero(self):
        assert M.complexity_gflops(384, 0, 256, 0.0, 16000) == 0.0

    def test_linear_in_rate(self):
        c1 = M.complexity_gflops(384, 16, 256, 0.1, 16000)
        c2 = M.complexity_gflops(384, 16, 256, 0.1, 32000)
        assert c2 == pytest.approx(2 * c1)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            M.complexity_gflops(-1, 16, 256, 0.1, 16000)
        with pytest.raises(ValueError):
            M.complexity_gflops(384, 16, 256, 1.5, 16000)
        with pytest.raises(ValueError):
            M.complexity_gflops(384, 16, 256, 0.1, 0)

    def test_model_accounting_near_formula(self):
        model = M.random_model(seed=22, n_a=384, n_b=16, density=0.1)
        actual = M.model_flops_per_sample(model)
        formula = M.formula_flops_per_sample(384, 16, 256, 0.1)
        assert abs(actual - formula) / formula < 0.05
