"""Progressive block sparsification of the large GRU's recurrent weights.

Training starts dense; between the schedule's start and end updates the
lowest-magnitude 16x1 blocks are forced to zero, linearly ramping down to
the target density.  The main diagonal is always retained.  Block ranking
is refreshed every `rerank_interval` updates, and the mask re-applied
after every optimizer step so pruned weights cannot regrow.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

BLOCK_ROWS = 16


@dataclass
class SparsifyConfig:
    start_update: int
    end_update: int
    target_density: float = 0.1
    rerank_interval: int = 400

    def __post_init__(self):
        if not 0.0 < self.target_density <= 1.0:
            raise ValueError("target density must be in (0, 1]")
        if self.start_update >= self.end_update:
            raise ValueError("schedule start must precede end")


def density_at(cfg: SparsifyConfig, update: int) -> float:
    """Linear ramp from 1.0 to the target over [start, end]."""
    if update <= cfg.start_update:
        return 1.0
    ramp = min(1.0, (update - cfg.start_update)
               / (cfg.end_update - cfg.start_update))
    return 1.0 - (1.0 - cfg.target_density) * ramp


def blocks_to_keep(n: int, density: float) -> int:
    """Block count whose cells (plus the free diagonal) hit the density."""
    if density >= 1.0:
        return (n // BLOCK_ROWS) * n
    cells = density * n * n - n
    per_block = BLOCK_ROWS - BLOCK_ROWS / n  # expected diagonal overlap
    return max(0, min((n // BLOCK_ROWS) * n, round(cells / per_block)))


class BlockSparsifier:
    """Owns the (3, n, n) recurrent weight masks of one GRU."""

    def __init__(self, weight: torch.nn.Parameter, cfg: SparsifyConfig):
        self.weight = weight
        self.cfg = cfg
        n = weight.shape[-1]
        if weight.shape != (3, n, n) or n % BLOCK_ROWS:
            raise ValueError(f"expected (3, n, n) with 16 | n, got {tuple(weight.shape)}")
        self.n = n
        self.mask = torch.ones_like(weight.data, dtype=torch.bool)
        self._eye = torch.eye(n, dtype=torch.bool)
        self._last_rerank = -1

    def block_mask(self, gate: int) -> torch.Tensor:
        """(n/16, n) boolean grid of kept blocks for one gate."""
        grid = self.mask[gate] & ~self._eye
        return grid.reshape(self.n // BLOCK_ROWS, BLOCK_ROWS, self.n).any(dim=1)

    def density(self) -> float:
        """Structural density including the always-kept diagonal."""
        per_gate = []
        for g in range(3):
            cells = BLOCK_ROWS * int(self.block_mask(g).sum()) + self.n
            overlap = int((self.block_mask(g)
                           .repeat_interleave(BLOCK_ROWS, dim=0) & self._eye)
                          .sum())
            per_gate.append((cells - overlap) / (self.n * self.n))
        return sum(per_gate) / 3.0

    @torch.no_grad()
    def _recompute(self, density: float) -> None:
        keep = blocks_to_keep(self.n, density)
        for g in range(3):
            w = self.weight.data[g].abs().clone()
            w.fill_diagonal_(0.0)
            scores = w.reshape(self.n // BLOCK_ROWS, BLOCK_ROWS, self.n).sum(1)
            flat = scores.reshape(-1)
            mask = torch.zeros_like(flat, dtype=torch.bool)
            if keep:
                mask[torch.topk(flat, keep).indices] = True
            grid = mask.reshape(self.n // BLOCK_ROWS, self.n)
            full = grid.repeat_interleave(BLOCK_ROWS, dim=0)
            self.mask[g] = full | self._eye

    @torch.no_grad()
    def step(self, update: int) -> None:
        """Call after every optimizer step with the global update index."""
        cfg = self.cfg
        if update >= cfg.start_update:
            due = (self._last_rerank < 0
                   or update - self._last_rerank >= cfg.rerank_interval
                   or (update >= cfg.end_update
                       and self._last_rerank < cfg.end_update))
            if due:
                self._recompute(density_at(cfg, update))
                self._last_rerank = update
            self.weight.data.mul_(self.mask)
