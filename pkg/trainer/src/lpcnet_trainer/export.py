"""Export trained parameters to the inference engine's weight format.

The embedding products are folded here, once: the nine per-(gate, input)
matrices map each mu-law level directly to its gate contribution, so the
engine never needs the embedding itself.  Sparse checkpoints store the
retained 16x1 blocks of the recurrent matrices with the diagonal held
separately (block values at diagonal positions are zeroed, the format
forbids double counting).  The byte layout matches the engine docs:
magic "LPCW", version, flags, tensor count, per-tensor records, CRC-32.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np
import torch

MAGIC = b"LPCW"
VERSION = 1
FLAG_FOLDED = 1
DTYPE_F32 = 0
KIND_DENSE = 0
KIND_BLOCK_SPARSE = 1
BLOCK_ROWS = 16
GATES = ("u", "r", "h")
EMBED_INPUTS = ("s", "p", "e")


class BlockTensor:
    """Block-sparse payload: (row_start, col) index pairs, 16 values per
    block, full diagonal."""

    def __init__(self, rows, cols, index, values, diag):
        self.rows, self.cols = rows, cols
        self.index = np.asarray(index, dtype=np.uint32).reshape(-1, 2)
        self.values = np.asarray(values, dtype=np.float32).reshape(-1, BLOCK_ROWS)
        self.diag = np.asarray(diag, dtype=np.float32)


def extract_blocks(w: np.ndarray, block_grid: np.ndarray) -> BlockTensor:
    """Split a masked square matrix into diagonal plus kept 16x1 blocks."""
    n = w.shape[0]
    diag = np.diagonal(w).astype(np.float32).copy()
    w_nd = w.astype(np.float32).copy()
    np.fill_diagonal(w_nd, 0.0)
    rows_idx, cols_idx = np.nonzero(block_grid)
    index = np.stack([rows_idx * BLOCK_ROWS, cols_idx], axis=1)
    values = np.stack([
        w_nd[r * BLOCK_ROWS:(r + 1) * BLOCK_ROWS, c]
        for r, c in zip(rows_idx, cols_idx)
    ]) if len(rows_idx) else np.zeros((0, BLOCK_ROWS), dtype=np.float32)
    return BlockTensor(n, n, index, values, diag)


def _write_record(buf: bytearray, name: str, tensor) -> None:
    nb = name.encode()
    buf += struct.pack("<H", len(nb)) + nb
    if isinstance(tensor, BlockTensor):
        buf += struct.pack("<BBB", DTYPE_F32, KIND_BLOCK_SPARSE, 2)
        buf += struct.pack("<2I", tensor.rows, tensor.cols)
        buf += struct.pack("<I", tensor.index.shape[0])
        buf += tensor.index.astype("<u4").tobytes()
        buf += tensor.values.astype("<f4").tobytes()
        buf += tensor.diag.astype("<f4").tobytes()
    else:
        arr = np.ascontiguousarray(tensor, dtype=np.float32)
        buf += struct.pack("<BBB", DTYPE_F32, KIND_DENSE, arr.ndim)
        buf += struct.pack(f"<{arr.ndim}I", *arr.shape)
        buf += arr.astype("<f4").tobytes()


def write_weight_file(path, items, flags=FLAG_FOLDED) -> None:
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<III", VERSION, flags, len(items))
    for name, tensor in items:
        _write_record(buf, name, tensor)
    buf += struct.pack("<I", zlib.crc32(bytes(buf)))
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def _np(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().numpy().astype(np.float32)


def model_tensors(model, sparsifier=None) -> list:
    """(name, tensor) pairs in the engine's naming scheme.

    With a sparsifier, the recurrent matrices go out block-sparse using its
    final mask; otherwise they are stored dense (a dense checkpoint).
    """
    fr, sp = model.frame_net, model.sample_net
    n_a, d = sp.n_a, sp.d_embed
    items = [
        ("frame.conv1.w", _np(fr.conv1.weight)),
        ("frame.conv1.b", _np(fr.conv1.bias)),
        ("frame.conv2.w", _np(fr.conv2.weight)),
        ("frame.conv2.b", _np(fr.conv2.bias)),
        ("frame.fc1.w", _np(fr.fc1.weight)),
        ("frame.fc1.b", _np(fr.fc1.bias)),
        ("frame.fc2.w", _np(fr.fc2.weight)),
        ("frame.fc2.b", _np(fr.fc2.bias)),
    ]
    w_a = _np(sp.w_a)
    for g_idx, g in enumerate(GATES):
        if sparsifier is not None:
            grid = sparsifier.block_mask(g_idx).cpu().numpy()
            items.append((f"gru_a.w_{g}", extract_blocks(w_a[g_idx], grid)))
        else:
            items.append((f"gru_a.w_{g}", w_a[g_idx]))
    b_a = _np(sp.b_a)
    items += [(f"gru_a.b_{g}", b_a[i]) for i, g in enumerate(GATES)]

    # fold the embedding into per-level gate contributions
    embedding = _np(sp.embed.weight)           # (256, d)
    u_a = _np(sp.u_a)                          # (3, n_a, 3d + 128)
    spans = {"s": (0, d), "p": (d, 2 * d), "e": (2 * d, 3 * d)}
    for g_idx, g in enumerate(GATES):
        for i in EMBED_INPUTS:
            lo, hi = spans[i]
            items.append((f"gru_a.v_{g}_{i}", u_a[g_idx, :, lo:hi] @ embedding.T))
    for g_idx, g in enumerate(GATES):
        items.append((f"gru_a.u_{g}_f", u_a[g_idx, :, 3 * d:]))

    w_b, b_b, u_b = _np(sp.w_b), _np(sp.b_b), _np(sp.u_b)
    items += [(f"gru_b.w_{g}", w_b[i]) for i, g in enumerate(GATES)]
    items += [(f"gru_b.b_{g}", b_b[i]) for i, g in enumerate(GATES)]
    items += [(f"gru_b.u_{g}", u_b[i]) for i, g in enumerate(GATES)]
    items += [
        ("dual_fc.w1", _np(sp.dual_w1)), ("dual_fc.w2", _np(sp.dual_w2)),
        ("dual_fc.a1", _np(sp.dual_a1)), ("dual_fc.a2", _np(sp.dual_a2)),
    ]
    return items


def export_model(model, path, sparsifier=None) -> None:
    """Write a trained (or freshly initialized) model for the engine.

    Uses `model._sparsifier` when present so a post-training export picks
    up the final mask automatically.
    """
    if sparsifier is None:
        sparsifier = getattr(model, "_sparsifier", None)
    write_weight_file(path, model_tensors(model, sparsifier), FLAG_FOLDED)
