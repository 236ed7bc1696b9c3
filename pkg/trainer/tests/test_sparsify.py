"""Pruning schedule: ramp shape, density target, diagonal retention."""

import pytest
import torch

from lpcnet_trainer.sparsify import (
    BlockSparsifier,
    SparsifyConfig,
    blocks_to_keep,
    density_at,
)
from lpcnet_trainer.train import step_size


def run_schedule(n=128, total=500, target=0.1, interval=50, seed=0):
    torch.manual_seed(seed)
    w = torch.nn.Parameter(torch.randn(3, n, n) * 0.1)
    cfg = SparsifyConfig(start_update=int(0.1 * total),
                         end_update=int(0.6 * total),
                         target_density=target, rerank_interval=interval)
    sp = BlockSparsifier(w, cfg)
    densities = []
    for b in range(total):
        w.data.add_(torch.randn_like(w.data) * 1e-3)  # stand-in for updates
        sp.step(b)
        densities.append(sp.density())
    return w, sp, densities


class TestSchedule:
    def test_step_size_reference_point(self):
        assert step_size(0.001, 5e-5, 20000) == pytest.approx(5e-4)

    def test_density_ramp_values(self):
        cfg = SparsifyConfig(start_update=100, end_update=600,
                             target_density=0.1)
        assert density_at(cfg, 0) == 1.0
        assert density_at(cfg, 100) == 1.0
        assert density_at(cfg, 350) == pytest.approx(0.55)
        assert density_at(cfg, 600) == pytest.approx(0.1)
        assert density_at(cfg, 10_000) == pytest.approx(0.1)

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            SparsifyConfig(start_update=10, end_update=5)
        with pytest.raises(ValueError):
            SparsifyConfig(start_update=1, end_update=2, target_density=0.0)

    def test_final_density_within_tolerance(self):
        _, sp, densities = run_schedule()
        assert abs(sp.density() - 0.1) <= 0.01
        # monotone non-increasing after the ramp starts (within rerank steps)
        assert densities[0] == 1.0
        assert min(densities) == densities[-1]

    def test_diagonal_never_zeroed(self):
        w, sp, _ = run_schedule()
        for g in range(3):
            assert torch.all(sp.mask[g].diagonal())
            assert torch.all(w.data[g].diagonal() != 0.0)

    def test_masked_weights_are_zero(self):
        w, sp, _ = run_schedule()
        for g in range(3):
            assert torch.all(w.data[g][~sp.mask[g]] == 0.0)

    def test_keeps_largest_blocks(self):
        n = 64
        w = torch.nn.Parameter(torch.zeros(3, n, n))
        # one overwhelmingly large block per gate at (16, 3)
        w.data[:, 16:32, 3] = 10.0
        w.data[:, 48:64, 10] = 0.001
        cfg = SparsifyConfig(start_update=0, end_update=1,
                             target_density=0.05, rerank_interval=1)
        sp = BlockSparsifier(w, cfg)
        sp.step(1)
        for g in range(3):
            assert sp.block_mask(g)[1, 3]
        assert abs(sp.density() - 0.05) < 0.02

    def test_blocks_to_keep_counts(self):
        assert blocks_to_keep(384, 1.0) == 24 * 384
        k = blocks_to_keep(384, 0.1)
        n = 384
        # expected structural density within a percent of the target
        approx = (16 * k + n - k * 16 / n) / (n * n)
        assert abs(approx - 0.1) < 0.01
