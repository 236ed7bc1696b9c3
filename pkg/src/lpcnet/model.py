"""Two-network topology, folded embeddings, and the binary weight format.

The frame-rate network turns a 5-frame feature window into a 128-value
conditioning vector, recomputed once per 10 ms frame.  The sample-rate
network runs per sample: a large block-sparse GRU fed by per-level folded
embedding lookups and the cached conditioning contribution, a small dense
GRU, and a dual fully-connected layer producing 256 excitation logits.

Weight files: little-endian, magic "LPCW", u32 version, u32 flags (bit 0 =
embeddings stored folded), u32 tensor count, then per-tensor records
(u16 name length, name, u8 dtype, u8 kind, u8 rank, u32 dims, payload) and
a trailing CRC-32 over all preceding bytes.  Dense payload is raw float32;
block-sparse payload is u32 block count, u32 (row_start, col) pairs, 16
float32 per block, then min(dims) float32 of diagonal.  See the README for
a hex-annotated example.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .dsp import NB_FEATURES
from .errors import (
    BadMagicError,
    ChecksumError,
    TensorShapeError,
    TruncatedFileError,
    VersionMismatchError,
)
from .nn import (
    BLOCK_ROWS,
    BlockSparseMatrix,
    DualFcParams,
    GruParams,
    conv1d_3,
    sigmoid,
    softmax,
)

CONDITIONING_SIZE = 128
FRAME_CHANNELS = 128
NB_LEVELS = 256
EMBED_DIM = 128

GATES = ("u", "r", "h")
EMBED_INPUTS = ("s", "p", "e")

MAGIC = b"LPCW"
FORMAT_VERSION = 1
FLAG_FOLDED = 1 << 0

DTYPE_F32 = 0
KIND_DENSE = 0
KIND_BLOCK_SPARSE = 1


# ---------------------------------------------------------------------------
# Frame-rate network
# ---------------------------------------------------------------------------


@dataclass
class FrameRateParams:
    """Two filter-size-3 conv layers, a residual add, two dense layers."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray

    def __post_init__(self):
        if self.conv1_w.shape != (FRAME_CHANNELS, NB_FEATURES, 3):
            raise TensorShapeError(
                f"frame.conv1.w: expected {(FRAME_CHANNELS, NB_FEATURES, 3)}, "
                f"got {self.conv1_w.shape}"
            )
        if self.conv2_w.shape != (FRAME_CHANNELS, FRAME_CHANNELS, 3):
            raise TensorShapeError(f"frame.conv2.w: got {self.conv2_w.shape}")
        for name in ("fc1_w", "fc2_w"):
            if getattr(self, name).shape != (CONDITIONING_SIZE, FRAME_CHANNELS):
                raise TensorShapeError(f"frame.{name}: got {getattr(self, name).shape}")


def frame_rate_forward(p: FrameRateParams, window: np.ndarray) -> np.ndarray:
    """Conditioning vector for the center frame of a 5-frame window.

    Frames beyond the sequence edges must be passed as zero rows, which
    makes per-frame and whole-sequence evaluation identical.  The second
    conv's output is added to the first conv's center output (the residual
    connection) before the two dense layers.
    """
    window = np.asarray(window, dtype=np.float32)
    if window.shape != (5, NB_FEATURES):
        raise ValueError(f"expected a (5, {NB_FEATURES}) window, got {window.shape}")
    c1 = np.stack([conv1d_3(p.conv1_w, p.conv1_b, window, t) for t in (1, 2, 3)])
    c2 = conv1d_3(p.conv2_w, p.conv2_b, c1, 1)
    h = np.tanh(p.fc1_w @ (c2 + c1[1]) + p.fc1_b)
    return np.tanh(p.fc2_w @ h + p.fc2_b)


def conditioning_sequence(p: FrameRateParams, features: np.ndarray) -> np.ndarray:
    """Per-frame conditioning vectors for a whole (n, 20) feature matrix."""
    feats = np.asarray(features, dtype=np.float32)
    n = feats.shape[0]
    padded = np.zeros((n + 4, NB_FEATURES), dtype=np.float32)
    padded[2:2 + n] = feats
    return np.stack(
        [frame_rate_forward(p, padded[t:t + 5]) for t in range(n)]
    ) if n else np.zeros((0, CONDITIONING_SIZE), dtype=np.float32)


# ---------------------------------------------------------------------------
# Folded embeddings and conditioning contributions
# ---------------------------------------------------------------------------


@dataclass
class FoldedEmbeddings:
    """Nine (N_A, 256) matrices: one per (gate, embedded input) pair.

    Column j is the non-recurrent gate contribution of mu-law level j, i.e.
    the gate's input submatrix multiplied by the embedding of level j.
    """

    v: dict

    def __post_init__(self):
        n_a = None
        for g in GATES:
            for i in EMBED_INPUTS:
                m = np.asarray(self.v[g, i], dtype=np.float32)
                if m.ndim != 2 or m.shape[1] != NB_LEVELS:
                    raise TensorShapeError(
                        f"v_{g}_{i}: expected (N_A, {NB_LEVELS}), got {m.shape}"
                    )
                if n_a is None:
                    n_a = m.shape[0]
                elif m.shape[0] != n_a:
                    raise TensorShapeError(f"v_{g}_{i}: inconsistent rows")
                self.v[g, i] = m

    @property
    def n_a(self) -> int:
        return self.v["u", "s"].shape[0]


def fold_embeddings(embedding: np.ndarray, u_sub: dict) -> FoldedEmbeddings:
    """Precompute V[g, i] = U[g, i] @ embedding.T for all nine pairs.

    `embedding` is (256, d) with one row per mu-law level; `u_sub` maps
    (gate, input) to the (N_A, d) submatrix of the gate's input weights
    that applies to that input's embedding.  Done once at load or export,
    never per sample.
    """
    e_t = np.ascontiguousarray(np.asarray(embedding, dtype=np.float32).T)
    if e_t.shape[1] != NB_LEVELS:
        raise TensorShapeError(f"embedding must have {NB_LEVELS} rows")
    v = {}
    for g in GATES:
        for i in EMBED_INPUTS:
            u = np.asarray(u_sub[g, i], dtype=np.float32)
            if u.shape[1] != e_t.shape[0]:
                raise TensorShapeError(
                    f"u_{g}_{i} columns {u.shape[1]} != embedding dim {e_t.shape[0]}"
                )
            v[g, i] = u @ e_t
    return FoldedEmbeddings(v)


@dataclass
class ConditioningContribution:
    """Cached per-frame gate contributions of the conditioning vector."""

    g_u: np.ndarray
    g_r: np.ndarray
    g_h: np.ndarray
    stacked: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.stacked = np.concatenate([self.g_u, self.g_r, self.g_h])


# ---------------------------------------------------------------------------
# Sample-rate network
# ---------------------------------------------------------------------------


@dataclass
class SampleRateParams:
    gru_a: GruParams
    gru_b: GruParams
    dual: DualFcParams
    folded: FoldedEmbeddings
    cond_u: np.ndarray
    cond_r: np.ndarray
    cond_h: np.ndarray

    def __post_init__(self):
        n_a, n_b = self.n_a, self.n_b
        if n_a % BLOCK_ROWS:
            raise TensorShapeError(f"N_A={n_a} is not a multiple of {BLOCK_ROWS}")
        if self.folded.n_a != n_a:
            raise TensorShapeError("folded embeddings do not match N_A")
        for name in ("cond_u", "cond_r", "cond_h"):
            m = getattr(self, name)
            if m.shape != (n_a, CONDITIONING_SIZE):
                raise TensorShapeError(f"{name}: got {m.shape}")
        if self.dual.w1.shape != (NB_LEVELS, n_b):
            raise TensorShapeError(f"dual_fc.w1: got {self.dual.w1.shape}")
        for name in ("u_u", "u_r", "u_h"):
            m = getattr(self.gru_b, name)
            if m is None or m.shape != (n_b, n_a):
                raise TensorShapeError(f"gru_b.{name}: expected ({n_b}, {n_a})")
        self._build_caches()

    @property
    def n_a(self) -> int:
        return self.gru_a.size

    @property
    def n_b(self) -> int:
        return self.gru_b.size

    def _build_caches(self):
        # Stacked (update|reset|candidate) forms so the per-sample loop does
        # one product per network instead of three.  The stacked recurrent
        # matrix is kept dense: BLAS matches or beats CSR here even at
        # density 0.1, and row-wise results equal the per-gate kernels.
        ws = (self.gru_a.w_u, self.gru_a.w_r, self.gru_a.w_h)
        self._wa = np.vstack([
            w.densify() if isinstance(w, BlockSparseMatrix) else w for w in ws
        ])
        self._ba = np.concatenate([self.gru_a.b_u, self.gru_a.b_r, self.gru_a.b_h])
        # Per-level lookup rows: (256, 3*N_A), contiguous per level.
        self._vt = {
            i: np.ascontiguousarray(
                np.concatenate([self.folded.v[g, i] for g in GATES]).T
            )
            for i in EMBED_INPUTS
        }
        self._wb = np.vstack([self.gru_b.w_u, self.gru_b.w_r, self.gru_b.w_h])
        self._ub = np.vstack([self.gru_b.u_u, self.gru_b.u_r, self.gru_b.u_h])
        self._bb = np.concatenate([self.gru_b.b_u, self.gru_b.b_r, self.gru_b.b_h])
        self._dual_w = np.vstack([self.dual.w1, self.dual.w2])


def frame_setup(p: SampleRateParams, f: np.ndarray) -> ConditioningContribution:
    """Per-frame gate contributions of the conditioning vector (no bias)."""
    f = np.asarray(f, dtype=np.float32)
    if f.shape != (CONDITIONING_SIZE,):
        raise ValueError(f"conditioning vector must be ({CONDITIONING_SIZE},)")
    return ConditioningContribution(
        g_u=p.cond_u @ f, g_r=p.cond_r @ f, g_h=p.cond_h @ f
    )


def sample_rate_logits(
    p: SampleRateParams,
    h_a: np.ndarray,
    h_b: np.ndarray,
    s_prev: int,
    p_cur: int,
    e_prev: int,
    g: ConditioningContribution,
):
    """One sample-rate step; returns (logits, new h_a, new h_b).

    Gate pre-activations are the recurrent product plus the three folded
    per-level lookups, the cached conditioning contribution and the bias.
    The small GRU consumes the large GRU's fresh output.
    """
    n = p.n_a
    rec = p._wa @ h_a
    inp = p._vt["s"][s_prev] + p._vt["p"][p_cur]
    inp += p._vt["e"][e_prev]
    inp += g.stacked
    inp += p._ba
    gates = sigmoid(rec[:2 * n] + inp[:2 * n])
    u, r = gates[:n], gates[n:]
    hbar = np.tanh(r * rec[2 * n:] + inp[2 * n:])
    h_a = u * h_a + (1.0 - u) * hbar

    m = p.n_b
    rec_b = p._wb @ h_b
    inp_b = p._ub @ h_a + p._bb
    gates_b = sigmoid(rec_b[:2 * m] + inp_b[:2 * m])
    u_b, r_b = gates_b[:m], gates_b[m:]
    hbar_b = np.tanh(r_b * rec_b[2 * m:] + inp_b[2 * m:])
    h_b = u_b * h_b + (1.0 - u_b) * hbar_b

    t = np.tanh(p._dual_w @ h_b)
    logits = p.dual.a1 * t[:NB_LEVELS] + p.dual.a2 * t[NB_LEVELS:]
    return logits, h_a, h_b


def sample_rate_step(p, h_a, h_b, s_prev, p_cur, e_prev, g):
    """Like :func:`sample_rate_logits` but returns the softmax distribution."""
    logits, h_a, h_b = sample_rate_logits(p, h_a, h_b, s_prev, p_cur, e_prev, g)
    return softmax(logits), h_a, h_b


@dataclass
class Model:
    frame: FrameRateParams
    sample: SampleRateParams

    @property
    def n_a(self) -> int:
        return self.sample.n_a

    @property
    def n_b(self) -> int:
        return self.sample.n_b


# ---------------------------------------------------------------------------
# Complexity accounting
# ---------------------------------------------------------------------------


def complexity_gflops(n_a=384, n_b=16, q=NB_LEVELS, density=0.1, rate=16000):
    """Synthesis cost in GFLOPS: two ops per weight in the two GRUs and the
    dual fully-connected layer, per output sample."""
    if n_a < 0 or n_b < 0 or q < 0:
        raise ValueError("sizes must be non-negative")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must be in [0, 1]")
    if rate <= 0:
        raise ValueError("sampling rate must be positive")
    per_weight = 3 * density * n_a * n_a + 3 * n_b * (n_a + n_b) + 2 * n_b * q
    return per_weight * 2 * rate / 1e9


def formula_flops_per_sample(n_a=384, n_b=16, q=NB_LEVELS, density=0.1) -> float:
    return (3 * density * n_a * n_a + 3 * n_b * (n_a + n_b) + 2 * n_b * q) * 2.0


def model_flops_per_sample(model: Model) -> float:
    """Two ops per addressable weight actually present in the model."""
    sp = model.sample
    n_a, n_b = sp.n_a, sp.n_b
    rec = 0
    for w in (sp.gru_a.w_u, sp.gru_a.w_r, sp.gru_a.w_h):
        if isinstance(w, BlockSparseMatrix):
            rec += w.structural_density() * n_a * n_a
        else:
            rec += w.size
    return (rec + 3 * n_b * (n_a + n_b) + 2 * n_b * NB_LEVELS) * 2.0


def gru_a_density(model: Model) -> float:
    """Mean structural density of the three recurrent matrices."""
    ws = (model.sample.gru_a.w_u, model.sample.gru_a.w_r, model.sample.gru_a.w_h)
    vals = [
        w.structural_density() if isinstance(w, BlockSparseMatrix) else 1.0
        for w in ws
    ]
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# Weight file format
# ---------------------------------------------------------------------------


def _write_dense(buf: bytearray, name: str, arr: np.ndarray) -> None:
    arr = np.asarray(arr, dtype=np.float32)
    nb = name.encode()
    buf += struct.pack("<H", len(nb)) + nb
    buf += struct.pack("<BBB", DTYPE_F32, KIND_DENSE, arr.ndim)
    buf += struct.pack(f"<{arr.ndim}I", *arr.shape)
    buf += arr.astype("<f4").tobytes()


def _write_sparse(buf: bytearray, name: str, m: BlockSparseMatrix) -> None:
    nb = name.encode()
    buf += struct.pack("<H", len(nb)) + nb
    buf += struct.pack("<BBB", DTYPE_F32, KIND_BLOCK_SPARSE, 2)
    buf += struct.pack("<2I", m.rows, m.cols)
    buf += struct.pack("<I", m.n_blocks)
    buf += m.block_index.astype("<u4").tobytes()
    buf += m.block_values.astype("<f4").tobytes()
    buf += m.diag.astype("<f4").tobytes()


def _tensor_items(model: Model) -> list:
    fr, sp = model.frame, model.sample
    items = [
        ("frame.conv1.w", fr.conv1_w), ("frame.conv1.b", fr.conv1_b),
        ("frame.conv2.w", fr.conv2_w), ("frame.conv2.b", fr.conv2_b),
        ("frame.fc1.w", fr.fc1_w), ("frame.fc1.b", fr.fc1_b),
        ("frame.fc2.w", fr.fc2_w), ("frame.fc2.b", fr.fc2_b),
        ("gru_a.w_u", sp.gru_a.w_u), ("gru_a.w_r", sp.gru_a.w_r),
        ("gru_a.w_h", sp.gru_a.w_h),
        ("gru_a.b_u", sp.gru_a.b_u), ("gru_a.b_r", sp.gru_a.b_r),
        ("gru_a.b_h", sp.gru_a.b_h),
    ]
    for g in GATES:
        for i in EMBED_INPUTS:
            items.append((f"gru_a.v_{g}_{i}", sp.folded.v[g, i]))
    items += [
        ("gru_a.u_u_f", sp.cond_u), ("gru_a.u_r_f", sp.cond_r),
        ("gru_a.u_h_f", sp.cond_h),
        ("gru_b.w_u", sp.gru_b.w_u), ("gru_b.w_r", sp.gru_b.w_r),
        ("gru_b.w_h", sp.gru_b.w_h),
        ("gru_b.b_u", sp.gru_b.b_u), ("gru_b.b_r", sp.gru_b.b_r),
        ("gru_b.b_h", sp.gru_b.b_h),
        ("gru_b.u_u", sp.gru_b.u_u), ("gru_b.u_r", sp.gru_b.u_r),
        ("gru_b.u_h", sp.gru_b.u_h),
        ("dual_fc.w1", sp.dual.w1), ("dual_fc.w2", sp.dual.w2),
        ("dual_fc.a1", sp.dual.a1), ("dual_fc.a2", sp.dual.a2),
    ]
    return items


def write_weight_file(path, items, flags: int) -> None:
    """Write named tensors (dense arrays or BlockSparseMatrix) with CRC-32."""
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<III", FORMAT_VERSION, flags, len(items))
    for name, tensor in items:
        if isinstance(tensor, BlockSparseMatrix):
            _write_sparse(buf, name, tensor)
        else:
            _write_dense(buf, name, tensor)
    buf += struct.pack("<I", zlib.crc32(bytes(buf)))
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def save_model(model: Model, path) -> None:
    """Write the model with folded embeddings and a trailing CRC-32."""
    write_weight_file(path, _tensor_items(model), FLAG_FOLDED)


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.off = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise TruncatedFileError(
                f"{self.path}: truncated, expected at least {self.off + n} "
                f"bytes, file has {len(self.data)}"
            )
        out = self.data[self.off:self.off + n]
        self.off += n
        return out

    def u8(self):
        return self.take(1)[0]

    def u16(self):
        return struct.unpack("<H", self.take(2))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def f32_array(self, count, shape=None):
        arr = np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32)
        return arr.reshape(shape) if shape is not None else arr


def read_tensor_records(path) -> tuple[int, dict]:
    """Parse a weight file into (flags, {name: tensor}) with full checks."""
    with open(path, "rb") as fh:
        data = fh.read()
    rd = _Reader(data, path)
    if rd.take(4) != MAGIC:
        raise BadMagicError(f"{path}: bad magic, not a weight file")
    version = rd.u32()
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    flags = rd.u32()
    count = rd.u32()
    tensors = {}
    for _ in range(count):
        name = rd.take(rd.u16()).decode()
        dtype = rd.u8()
        if dtype != DTYPE_F32:
            raise TensorShapeError(f"{path}: tensor {name!r}: unknown dtype {dtype}")
        kind = rd.u8()
        rank = rd.u8()
        dims = [rd.u32() for _ in range(rank)]
        if any(d <= 0 for d in dims):
            raise TensorShapeError(f"{path}: tensor {name!r}: bad dims {dims}")
        if kind == KIND_DENSE:
            tensors[name] = rd.f32_array(int(np.prod(dims)), tuple(dims))
        elif kind == KIND_BLOCK_SPARSE:
            if rank != 2:
                raise TensorShapeError(
                    f"{path}: tensor {name!r}: block-sparse rank must be 2"
                )
            nb = rd.u32()
            index = np.frombuffer(rd.take(8 * nb), dtype="<u4").astype(
                np.int64
            ).reshape(nb, 2)
            values = rd.f32_array(BLOCK_ROWS * nb, (nb, BLOCK_ROWS))
            diag = rd.f32_array(min(dims))
            try:
                tensors[name] = BlockSparseMatrix(
                    rows=dims[0], cols=dims[1], block_index=index,
                    block_values=values, diag=diag,
                )
            except ValueError as exc:
                raise TensorShapeError(f"{path}: tensor {name!r}: {exc}") from exc
        else:
            raise TensorShapeError(f"{path}: tensor {name!r}: unknown kind {kind}")
    stored = rd.u32()
    if rd.off != len(data):
        raise TensorShapeError(f"{path}: {len(data) - rd.off} trailing bytes")
    actual = zlib.crc32(data[:-4])
    if stored != actual:
        raise ChecksumError(
            f"{path}: checksum mismatch, stored {stored:#010x}, "
            f"computed {actual:#010x}"
        )
    return flags, tensors


def _require(tensors: dict, name: str, path, shape=None):
    if name not in tensors:
        raise TensorShapeError(f"{path}: missing tensor {name!r}")
    t = tensors[name]
    actual = (t.rows, t.cols) if isinstance(t, BlockSparseMatrix) else t.shape
    if shape is not None and tuple(actual) != tuple(shape):
        raise TensorShapeError(
            f"{path}: tensor {name!r}: expected shape {tuple(shape)}, got "
            f"{tuple(actual)}"
        )
    return t


def load_model(path) -> Model:
    """Load and validate a weight file, folding embeddings if needed."""
    flags, tensors = read_tensor_records(path)

    frame = FrameRateParams(
        conv1_w=_require(tensors, "frame.conv1.w", path, (FRAME_CHANNELS, NB_FEATURES, 3)),
        conv1_b=_require(tensors, "frame.conv1.b", path, (FRAME_CHANNELS,)),
        conv2_w=_require(tensors, "frame.conv2.w", path, (FRAME_CHANNELS, FRAME_CHANNELS, 3)),
        conv2_b=_require(tensors, "frame.conv2.b", path, (FRAME_CHANNELS,)),
        fc1_w=_require(tensors, "frame.fc1.w", path, (CONDITIONING_SIZE, FRAME_CHANNELS)),
        fc1_b=_require(tensors, "frame.fc1.b", path, (CONDITIONING_SIZE,)),
        fc2_w=_require(tensors, "frame.fc2.w", path, (CONDITIONING_SIZE, FRAME_CHANNELS)),
        fc2_b=_require(tensors, "frame.fc2.b", path, (CONDITIONING_SIZE,)),
    )

    b_u = _require(tensors, "gru_a.b_u", path)
    n_a = b_u.shape[0]
    if n_a % BLOCK_ROWS:
        raise TensorShapeError(f"{path}: N_A={n_a} not a multiple of {BLOCK_ROWS}")
    gru_a = GruParams(
        w_u=_require(tensors, "gru_a.w_u", path, (n_a, n_a)),
        w_r=_require(tensors, "gru_a.w_r", path, (n_a, n_a)),
        w_h=_require(tensors, "gru_a.w_h", path, (n_a, n_a)),
        b_u=b_u,
        b_r=_require(tensors, "gru_a.b_r", path, (n_a,)),
        b_h=_require(tensors, "gru_a.b_h", path, (n_a,)),
    )

    if flags & FLAG_FOLDED:
        folded = FoldedEmbeddings({
            (g, i): _require(tensors, f"gru_a.v_{g}_{i}", path, (n_a, NB_LEVELS))
            for g in GATES for i in EMBED_INPUTS
        })
    else:
        embedding = _require(tensors, "embed.e", path)
        if embedding.shape[0] != NB_LEVELS:
            raise TensorShapeError(
                f"{path}: embed.e must have {NB_LEVELS} rows, got {embedding.shape}"
            )
        d = embedding.shape[1]
        folded = fold_embeddings(embedding, {
            (g, i): _require(tensors, f"gru_a.u_{g}_{i}", path, (n_a, d))
            for g in GATES for i in EMBED_INPUTS
        })

    b_bu = _require(tensors, "gru_b.b_u", path)
    n_b = b_bu.shape[0]
    gru_b = GruParams(
        w_u=_require(tensors, "gru_b.w_u", path, (n_b, n_b)),
        w_r=_require(tensors, "gru_b.w_r", path, (n_b, n_b)),
        w_h=_require(tensors, "gru_b.w_h", path, (n_b, n_b)),
        b_u=b_bu,
        b_r=_require(tensors, "gru_b.b_r", path, (n_b,)),
        b_h=_require(tensors, "gru_b.b_h", path, (n_b,)),
        u_u=_require(tensors, "gru_b.u_u", path, (n_b, n_a)),
        u_r=_require(tensors, "gru_b.u_r", path, (n_b, n_a)),
        u_h=_require(tensors, "gru_b.u_h", path, (n_b, n_a)),
    )

    dual = DualFcParams(
        w1=_require(tensors, "dual_fc.w1", path, (NB_LEVELS, n_b)),
        w2=_require(tensors, "dual_fc.w2", path, (NB_LEVELS, n_b)),
        a1=_require(tensors, "dual_fc.a1", path, (NB_LEVELS,)),
        a2=_require(tensors, "dual_fc.a2", path, (NB_LEVELS,)),
    )

    sample = SampleRateParams(
        gru_a=gru_a, gru_b=gru_b, dual=dual, folded=folded,
        cond_u=_require(tensors, "gru_a.u_u_f", path, (n_a, CONDITIONING_SIZE)),
        cond_r=_require(tensors, "gru_a.u_r_f", path, (n_a, CONDITIONING_SIZE)),
        cond_h=_require(tensors, "gru_a.u_h_f", path, (n_a, CONDITIONING_SIZE)),
    )
    return Model(frame=frame, sample=sample)


def describe_tensors(path) -> list[dict]:
    """Name/kind/shape/density summary of every tensor, for the dump CLI."""
    _, tensors = read_tensor_records(path)
    out = []
    for name, t in tensors.items():
        if isinstance(t, BlockSparseMatrix):
            out.append({
                "name": name, "kind": "block-sparse",
                "shape": (t.rows, t.cols), "blocks": t.n_blocks,
                "density": t.structural_density(),
            })
        else:
            out.append({"name": name, "kind": "dense", "shape": t.shape})
    return out


# ---------------------------------------------------------------------------
# Random initialization (tests, bench)
# ---------------------------------------------------------------------------


def random_block_sparse(rng, n: int, density: float) -> BlockSparseMatrix:
    """Random square block-sparse matrix with the given structural density."""
    grid_rows = n // BLOCK_ROWS
    total = grid_rows * n
    # Diagonal cells come free; each block contributes 16 cells minus the
    # expected diagonal overlap.
    want = max(0, round((density * n * n - n) / (BLOCK_ROWS - BLOCK_ROWS / n)))
    want = min(want, total)
    chosen = rng.choice(total, size=want, replace=False)
    index = np.stack([(chosen // n) * BLOCK_ROWS, chosen % n], axis=1)
    values = rng.uniform(-1, 1, size=(want, BLOCK_ROWS)).astype(np.float32)
    values /= np.float32(np.sqrt(n * max(density, 1e-3)))
    for b, (r, c) in enumerate(index):
        if r <= c < r + BLOCK_ROWS:
            values[b, c - r] = 0.0
    diag = rng.uniform(-1, 1, size=n).astype(np.float32)
    return BlockSparseMatrix(
        rows=n, cols=n, block_index=index, block_values=values, diag=diag
    )


def _rand(rng, *shape):
    scale = 1.0 / np.sqrt(shape[-1] if len(shape) > 1 else shape[0])
    return rng.uniform(-scale, scale, size=shape).astype(np.float32)


def random_model(seed=0, n_a=384, n_b=16, density=0.1, sparse=True) -> Model:
    """Randomly initialized model, used by tests and the bench harness."""
    rng = np.random.default_rng(seed)
    frame = FrameRateParams(
        conv1_w=_rand(rng, FRAME_CHANNELS, NB_FEATURES, 3).reshape(
            FRAME_CHANNELS, NB_FEATURES, 3),
        conv1_b=_rand(rng, FRAME_CHANNELS),
        conv2_w=_rand(rng, FRAME_CHANNELS, FRAME_CHANNELS, 3),
        conv2_b=_rand(rng, FRAME_CHANNELS),
        fc1_w=_rand(rng, CONDITIONING_SIZE, FRAME_CHANNELS),
        fc1_b=_rand(rng, CONDITIONING_SIZE),
        fc2_w=_rand(rng, CONDITIONING_SIZE, FRAME_CHANNELS),
        fc2_b=_rand(rng, CONDITIONING_SIZE),
    )
    if sparse:
        w_a = {g: random_block_sparse(rng, n_a, density) for g in GATES}
    else:
        w_a = {g: _rand(rng, n_a, n_a) for g in GATES}
    gru_a = GruParams(
        w_u=w_a["u"], w_r=w_a["r"], w_h=w_a["h"],
        b_u=_rand(rng, n_a), b_r=_rand(rng, n_a), b_h=_rand(rng, n_a),
    )
    embedding = rng.uniform(-0.1, 0.1, size=(NB_LEVELS, EMBED_DIM)).astype(np.float32)
    folded = fold_embeddings(embedding, {
        (g, i): _rand(rng, n_a, EMBED_DIM) for g in GATES for i in EMBED_INPUTS
    })
    gru_b = GruParams(
        w_u=_rand(rng, n_b, n_b), w_r=_rand(rng, n_b, n_b), w_h=_rand(rng, n_b, n_b),
        b_u=_rand(rng, n_b), b_r=_rand(rng, n_b), b_h=_rand(rng, n_b),
        u_u=_rand(rng, n_b, n_a), u_r=_rand(rng, n_b, n_a), u_h=_rand(rng, n_b, n_a),
    )
    dual = DualFcParams(
        w1=_rand(rng, NB_LEVELS, n_b), w2=_rand(rng, NB_LEVELS, n_b),
        a1=_rand(rng, NB_LEVELS) * 4.0, a2=_rand(rng, NB_LEVELS) * 4.0,
    )
    sample = SampleRateParams(
        gru_a=gru_a, gru_b=gru_b, dual=dual, folded=folded,
        cond_u=_rand(rng, n_a, CONDITIONING_SIZE),
        cond_r=_rand(rng, n_a, CONDITIONING_SIZE),
        cond_h=_rand(rng, n_a, CONDITIONING_SIZE),
    )
    return Model(frame=frame, sample=sample)
