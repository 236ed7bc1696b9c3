"""Inference-only neural kernels.

Dense and block-sparse matrix-vector products, the GRU cell, filter-size-3
time convolution, the dual fully-connected output layer and softmax.  All
kernels are pure, use float32 weights, and are deterministic across calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix

BLOCK_ROWS = 16


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def relu(x):
    return np.maximum(x, 0.0)


def dense_gemv(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = m @ x with an explicit dimension check."""
    m = np.asarray(m)
    x = np.asarray(x)
    if m.ndim != 2 or m.shape[1] != x.shape[0]:
        raise ValueError(f"shape mismatch: {m.shape} @ {x.shape}")
    return m @ x


@dataclass
class BlockSparseMatrix:
    """Sparse matrix of 16x1 vertical blocks plus a mandatory diagonal.

    `block_index` holds (row_start, col) pairs with row_start a multiple of
    16; `block_values` the 16 values per block.  The diagonal is stored
    separately; a block covering a diagonal position must hold 0 there so
    densification never double-counts.
    """

    rows: int
    cols: int
    block_index: np.ndarray
    block_values: np.ndarray
    diag: np.ndarray
    _csr: csr_matrix | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.block_index = np.asarray(self.block_index, dtype=np.int64).reshape(-1, 2)
        self.block_values = np.asarray(self.block_values, dtype=np.float32).reshape(
            -1, BLOCK_ROWS
        )
        self.diag = np.asarray(self.diag, dtype=np.float32)
        nb = self.block_index.shape[0]
        if self.block_values.shape[0] != nb:
            raise ValueError("block_index and block_values disagree on count")
        if self.diag.shape != (min(self.rows, self.cols),):
            raise ValueError("diagonal must have min(rows, cols) entries")
        if nb:
            r, c = self.block_index[:, 0], self.block_index[:, 1]
            if np.any(r % BLOCK_ROWS):
                raise ValueError("block row_start must be a multiple of 16")
            if np.any(r < 0) or np.any(r + BLOCK_ROWS > self.rows):
                raise ValueError("block rows out of bounds")
            if np.any(c < 0) or np.any(c >= self.cols):
                raise ValueError("block column out of bounds")
            keys = r * self.cols + c
            if np.unique(keys).size != nb:
                raise ValueError("duplicate blocks")
            on_diag = (self.diag.size > c) & (c >= r) & (c < r + BLOCK_ROWS)
            if np.any(self.block_values[on_diag, (c - r)[on_diag].astype(int)] != 0.0):
                raise ValueError("block values on the diagonal must be 0")

    @property
    def n_blocks(self) -> int:
        return self.block_index.shape[0]

    def densify(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.float32)
        for (r, c), vals in zip(self.block_index, self.block_values):
            out[r:r + BLOCK_ROWS, c] += vals
        out[np.arange(self.diag.size), np.arange(self.diag.size)] += self.diag
        return out

    def structural_density(self) -> float:
        """Fraction of cells addressable by blocks or the diagonal."""
        covered = BLOCK_ROWS * self.n_blocks + self.diag.size
        if self.n_blocks:
            r, c = self.block_index[:, 0], self.block_index[:, 1]
            inside = (c >= r) & (c < r + BLOCK_ROWS) & (c < self.diag.size)
            covered -= int(np.count_nonzero(inside))
        return covered / (self.rows * self.cols)

    def _as_csr(self) -> csr_matrix:
        if self._csr is None:
            n = self.n_blocks
            rows = (
                self.block_index[:, 0:1] + np.arange(BLOCK_ROWS)
            ).reshape(-1) if n else np.zeros(0, dtype=np.int64)
            cols = np.repeat(self.block_index[:, 1], BLOCK_ROWS) if n else rows
            d = np.arange(self.diag.size)
            self._csr = csr_matrix(
                (
                    np.concatenate([self.block_values.reshape(-1), self.diag]),
                    (np.concatenate([rows, d]), np.concatenate([cols, d])),
                ),
                shape=(self.rows, self.cols),
                dtype=np.float32,
            )
        return self._csr

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.cols:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} @ {x.shape}")
        return self._as_csr().dot(x)


def sparse_gemv(m: BlockSparseMatrix, x: np.ndarray) -> np.ndarray:
    """Block plus diagonal product; equals dense_gemv on densify(m)."""
    return m.matvec(np.asarray(x))


def _matvec(m, x):
    if isinstance(m, BlockSparseMatrix):
        return m.matvec(x)
    return m @ x


@dataclass
class GruParams:
    """Gate-ordered (update, reset, candidate) GRU weights.

    Recurrent matrices may be dense arrays or BlockSparseMatrix.  Input
    matrices are optional: when inputs arrive pre-summed (folded embedding
    lookups, cached conditioning) they are absent.
    """

    w_u: object
    w_r: object
    w_h: object
    b_u: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray
    u_u: np.ndarray | None = None
    u_r: np.ndarray | None = None
    u_h: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.b_u.shape[0]

    def input_terms(self, x: np.ndarray) -> tuple:
        """Per-gate non-recurrent contributions U @ x."""
        return (self.u_u @ x, self.u_r @ x, self.u_h @ x)


def gru_step(p: GruParams, h_prev: np.ndarray, extra) -> np.ndarray:
    """One GRU update.

    `extra` carries the already-summed non-recurrent term per gate
    (update, reset, candidate).  The reset gate scales only the recurrent
    contribution of the candidate:

        u = sigmoid(W_u h + extra_u + b_u)
        r = sigmoid(W_r h + extra_r + b_r)
        hbar = tanh(r * (W_h h) + extra_h + b_h)
        h' = u * h + (1 - u) * hbar
    """
    x_u, x_r, x_h = extra
    u = sigmoid(_matvec(p.w_u, h_prev) + x_u + p.b_u)
    r = sigmoid(_matvec(p.w_r, h_prev) + x_r + p.b_r)
    hbar = np.tanh(r * _matvec(p.w_h, h_prev) + x_h + p.b_h)
    return u * h_prev + (1.0 - u) * hbar


@dataclass
class DualFcParams:
    """Element-wise weighted sum of two tanh fully-connected layers."""

    w1: np.ndarray
    w2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        if self.w1.shape != self.w2.shape:
            raise ValueError("w1 and w2 must have the same shape")
        if self.a1.shape != (self.w1.shape[0],) or self.a2.shape != self.a1.shape:
            raise ValueError("weighting vectors must match output rows")


def dual_fc(p: DualFcParams, x: np.ndarray) -> np.ndarray:
    """a1 * tanh(W1 x) + a2 * tanh(W2 x)."""
    if x.shape[0] != p.w1.shape[1]:
        raise ValueError(f"shape mismatch: {p.w1.shape} @ {x.shape}")
    return p.a1 * np.tanh(p.w1 @ x) + p.a2 * np.tanh(p.w2 @ x)


def conv1d_3(weights: np.ndarray, bias: np.ndarray, frames: np.ndarray, t: int):
    """Filter-size-3 time convolution with tanh, zero-padded at the edges.

    `weights` is (out, in, 3) with taps aligned to frames t-1, t, t+1.
    """
    n = frames.shape[0]
    acc = np.array(bias, dtype=np.float32, copy=True)
    for k in range(3):
        j = t - 1 + k
        if 0 <= j < n:
            acc += weights[:, :, k] @ frames[j]
    return np.tanh(acc)


def softmax(x: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax, normalized in float64; entries >= 0, sum 1."""
    z = np.asarray(x, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()
