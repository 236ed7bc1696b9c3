"""Block-sparse matrices and the recurrent cell.

The big recurrent matrices keep only 16x1 vertical blocks plus the whole
main diagonal, which vectorizes cleanly at 10 percent density.  This demo
shows the storage format, the densification oracle, and one step of the
gated recurrent cell the sample-rate network is built from.
"""

import numpy as np

from lpcnet.nn import (
    BlockSparseMatrix,
    GruParams,
    dense_gemv,
    gru_step,
    sparse_gemv,
)

rng = np.random.default_rng(0)

# --- the storage format ------------------------------------------------------
# A 64x64 matrix with four blocks and its diagonal (block columns chosen
# outside each block's row range; straddling the diagonal comes later):
index = [[0, 40], [16, 3], [32, 50], [48, 20]]
values = rng.normal(0, 0.3, (4, 16)).astype(np.float32)
m = BlockSparseMatrix(rows=64, cols=64, block_index=index,
                      block_values=values,
                      diag=rng.normal(0, 0.3, 64).astype(np.float32))
print("blocks:", m.n_blocks)
print("structural density:", round(m.structural_density(), 4))

x = rng.normal(0, 0.5, 64).astype(np.float32)
print("sparse product == dense product:",
      np.max(np.abs(sparse_gemv(m, x) - dense_gemv(m.densify(), x))) < 1e-6)

# Blocks may straddle the diagonal, but the in-block cell at the diagonal
# must be zero; the diagonal array is the single source of those values.
straddling = np.ones(16, dtype=np.float32)
straddling[4] = 0.0  # row 20 == column 20
m2 = BlockSparseMatrix(rows=64, cols=64, block_index=[[16, 20]],
                       block_values=straddling,
                       diag=np.full(64, 2.0, dtype=np.float32))
y = sparse_gemv(m2, np.eye(64, dtype=np.float32)[20])
print("column 20 hits rows 16..31 plus diagonal:", y[16:32])

# --- one GRU step -------------------------------------------------------------
n = 8
params = GruParams(
    w_u=rng.normal(0, 0.3, (n, n)).astype(np.float32),
    w_r=rng.normal(0, 0.3, (n, n)).astype(np.float32),
    w_h=rng.normal(0, 0.3, (n, n)).astype(np.float32),
    b_u=np.zeros(n, dtype=np.float32),
    b_r=np.zeros(n, dtype=np.float32),
    b_h=np.zeros(n, dtype=np.float32),
)
h = np.zeros(n, dtype=np.float32)
inputs = tuple(rng.normal(0, 1.0, n) for _ in range(3))
for step in range(3):
    h = gru_step(params, h, inputs)
    print(f"step {step}: |h| max = {np.max(np.abs(h)):.3f}  (always < 1)")

# With zero weights and inputs the cell halves its state each step:
zeros = GruParams(*(np.zeros((n, n), dtype=np.float32) for _ in range(3)),
                  *(np.zeros(n, dtype=np.float32) for _ in range(3)))
h = np.ones(n, dtype=np.float32)
zi = tuple(np.zeros(n) for _ in range(3))
print("halving:", [float(gru_step(zeros, h * s, zi)[0]) for s in (1.0, 0.5)])
