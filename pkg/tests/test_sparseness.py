"""Tests for super-level sets and the linear sparseness scan."""

import numpy as np
import pytest

from mhdlab import (
    Grid,
    ParameterError,
    ScaleError,
    SpectralField,
    global_sparseness_scan,
    is_sparse_at,
    segment_occupancy,
    super_level_set,
    sup_norm,
)
from conftest import random_divfree


@pytest.fixture(scope="module")
def slab_set():
    """A smooth jet localized in x1: its super-level set is a slab."""
    g = Grid(dim=2, n=64, length=1.0)
    x = g.coords[0]
    sigma = 0.07
    prof = np.exp(-np.sin(np.pi * (x - 0.5)) ** 2 / (2.0 * sigma**2))
    f = SpectralField.from_physical(
        g, np.stack([np.zeros_like(prof), prof]), divergence_free=True
    )
    level_set = super_level_set(f, 0.5)
    # analytic half width of {prof > 1/2}
    half = np.arcsin(np.sqrt(2.0 * sigma**2 * np.log(2.0))) / np.pi
    return level_set, half


class TestSuperLevelSet:
    def test_threshold_above_sup_is_empty(self, grid2):
        f = random_divfree(grid2, seed=1, amplitude=0.5)
        s = super_level_set(f, sup_norm(f) * 1.01)
        assert not s.indicator.any()

    def test_zero_threshold_nowhere_zero_is_full(self, grid2):
        arr = np.full((2,) + grid2.shape, 0.3)
        f = SpectralField.from_physical(grid2, arr)
        s = super_level_set(f, 0.0)
        assert s.indicator.all()

    def test_single_mode_occupied_fraction(self):
        # {|sin| > 1/sqrt(2)} covers half of each period
        g = Grid(dim=2, n=64)
        x, _ = g.coords
        f = SpectralField.from_physical(g, np.stack([np.sin(x), np.zeros_like(x)]))
        s = super_level_set(f, 1.0 / np.sqrt(2.0))
        assert abs(s.occupied_fraction - 0.5) <= 2.0 / 64

    def test_negative_threshold_rejected(self, grid2):
        with pytest.raises(ParameterError):
            super_level_set(SpectralField.zeros(grid2), -0.5)


class TestSegmentOccupancy:
    def test_empty_set_is_zero(self, grid2):
        f = random_divfree(grid2, seed=2, amplitude=0.5)
        s = super_level_set(f, sup_norm(f) * 2.0)
        occ = segment_occupancy(s, np.zeros(2), np.array([1.0, 0.0]), 1.0, samples=128)
        assert occ == 0.0

    def test_full_set_is_one(self, grid2):
        arr = np.full((2,) + grid2.shape, 1.0)
        s = super_level_set(SpectralField.from_physical(grid2, arr), 0.5)
        occ = segment_occupancy(s, np.zeros(2), np.array([0.0, 1.0]), 1.0, samples=128)
        assert occ == 1.0

    def test_slab_matches_analytic_ratio(self, slab_set):
        level_set, half = slab_set
        r = 0.3
        samples = 512
        occ = segment_occupancy(
            level_set, np.array([0.5, 0.3]), np.array([1.0, 0.0]), r, samples=samples
        )
        analytic = 2.0 * half / (2.0 * r)
        assert abs(occ - analytic) <= 2.0 / samples + 1e-3

    def test_sample_refinement_converges(self, slab_set):
        level_set, _ = slab_set
        x0 = np.array([0.5, 0.1])
        d = np.array([1.0, 0.0])
        coarse = segment_occupancy(level_set, x0, d, 0.25, samples=256)
        fine = segment_occupancy(level_set, x0, d, 0.25, samples=512)
        assert abs(fine - coarse) <= 2.0 / 256 + 1e-3

    def test_requires_unit_direction(self, slab_set):
        level_set, _ = slab_set
        with pytest.raises(ParameterError):
            segment_occupancy(level_set, np.zeros(2), np.array([1.0, 1.0]), 0.2)

    def test_sample_floor(self, slab_set):
        level_set, _ = slab_set
        with pytest.raises(ParameterError):
            segment_occupancy(level_set, np.zeros(2), np.array([1.0, 0.0]), 0.2, samples=32)

    def test_overlong_segment_rejected(self, slab_set):
        level_set, _ = slab_set
        with pytest.raises(ScaleError):
            segment_occupancy(level_set, np.zeros(2), np.array([1.0, 0.0]), 0.7, samples=128)

    def test_permutation_invariance(self, grid2):
        # swapping axes of the set, the point, and the direction together
        # leaves the occupancy unchanged
        f = random_divfree(grid2, seed=3, amplitude=1.0)
        s = super_level_set(f, 0.4)
        swapped = super_level_set(
            SpectralField.from_physical(grid2, f.physical[::-1].transpose(0, 2, 1)), 0.4
        )
        x0 = np.array([1.1, 2.3])
        d = np.array([0.6, 0.8])
        a = segment_occupancy(s, x0, d, 0.5, samples=256)
        b = segment_occupancy(swapped, x0[::-1], d[::-1], 0.5, samples=256)
        assert abs(a - b) <= 1e-12


class TestIsSparseAt:
    def test_empty_set_sparse_with_zero_ratio(self, grid2):
        f = random_divfree(grid2, seed=4, amplitude=0.5)
        s = super_level_set(f, sup_norm(f) * 2.0)
        rep = is_sparse_at(s, np.zeros(2), 0.5, 0.4, dir_count=8, scale_count=4, samples=64)
        assert rep.sparse and rep.ratio == 0.0

    def test_thin_slab_sparse_with_normal_witness(self, slab_set):
        level_set, half = slab_set
        rep = is_sparse_at(
            level_set, np.array([0.5, 0.2]), 0.5, 0.3, dir_count=16, scale_count=4, samples=256
        )
        assert rep.sparse
        assert abs(abs(rep.direction[0]) - 1.0) <= 0.25  # nearly the slab normal
        assert rep.ratio == pytest.approx(2 * half / (2 * rep.scale), abs=0.02)

    def test_full_box_not_sparse(self, grid2):
        arr = np.full((2,) + grid2.shape, 1.0)
        s = super_level_set(SpectralField.from_physical(grid2, arr), 0.5)
        rep = is_sparse_at(s, np.zeros(2), 0.9, 0.5, dir_count=8, scale_count=4, samples=64)
        assert not rep.sparse and rep.ratio == 1.0

    def test_report_carries_resolution(self, slab_set):
        level_set, _ = slab_set
        rep = is_sparse_at(
            level_set, np.zeros(2), 0.5, 0.3, dir_count=12, scale_count=5, samples=96
        )
        assert (rep.dir_count, rep.scale_count, rep.samples) == (12, 5, 96)
        assert rep.scale_cap == pytest.approx(0.3)

    @pytest.mark.parametrize("seed", range(10))
    def test_threshold_monotonicity(self, grid2, seed):
        rng = np.random.default_rng(500 + seed)
        f = random_divfree(grid2, seed=600 + seed, amplitude=1.0)
        m1 = rng.uniform(0.1, 0.5)
        m2 = m1 + rng.uniform(0.05, 0.4)
        s1 = super_level_set(f, m1)
        s2 = super_level_set(f, m2)
        assert not (s2.indicator & ~s1.indicator).any()  # containment
        x0 = rng.uniform(0, grid2.length, size=2)
        kw = dict(dir_count=8, scale_count=4, samples=64)
        r1 = is_sparse_at(s1, x0, 0.5, 1.5, **kw)
        r2 = is_sparse_at(s2, x0, 0.5, 1.5, **kw)
        if r1.sparse:
            assert r2.sparse


class TestGlobalScan:
    def test_empty_set_all_sparse(self, grid2):
        f = random_divfree(grid2, seed=7, amplitude=0.5)
        s = super_level_set(f, sup_norm(f) * 2.0)
        reports, summary = global_sparseness_scan(
            s, 0.5, 0.5, stride=8, dir_count=8, scale_count=2, samples=64
        )
        assert summary.all_sparse and summary.worst_ratio == 0.0
        assert summary.points == (grid2.n // 8) ** 2

    def test_full_box_all_fail(self, grid2):
        arr = np.full((2,) + grid2.shape, 1.0)
        s = super_level_set(SpectralField.from_physical(grid2, arr), 0.5)
        reports, summary = global_sparseness_scan(
            s, 0.9, 0.5, stride=16, dir_count=4, scale_count=2, samples=64
        )
        assert summary.failures == summary.points
        assert summary.worst_ratio == 1.0

    def test_slab_passes_everywhere(self, slab_set):
        level_set, _ = slab_set
        reports, summary = global_sparseness_scan(
            level_set, 0.5, 0.3, stride=16, dir_count=16, scale_count=4, samples=128
        )
        assert summary.all_sparse

    def test_stride_must_divide(self, slab_set):
        level_set, _ = slab_set
        with pytest.raises(ParameterError):
            global_sparseness_scan(level_set, 0.5, 0.3, stride=7)
