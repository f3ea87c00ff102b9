"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from mhdlab import Grid, SpectralField, leray_project, sup_norm


def random_divfree(grid, seed, amplitude=0.5, decay=1.0):
    """Random smooth divergence-free field, independent of the library's
    initial-data generator (plain seeded noise, Gaussian spectral decay,
    projection)."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    hat = np.fft.fftn(noise, axes=tuple(range(1, grid.dim + 1)), norm="forward")
    hat *= np.exp(-decay * grid.k_squared) * grid.dealias_mask
    hat[(slice(None),) + (0,) * grid.dim] = 0.0
    f = leray_project(SpectralField.from_spectral(grid, hat))
    s = sup_norm(f)
    if s == 0:
        return SpectralField.zeros(grid)
    return SpectralField.from_spectral(grid, f.spectral * (amplitude / s), divergence_free=True)


@pytest.fixture(scope="session")
def grid2():
    return Grid(dim=2, n=32)


@pytest.fixture(scope="session")
def grid3():
    return Grid(dim=3, n=16)
