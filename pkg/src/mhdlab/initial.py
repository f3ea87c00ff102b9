"""Initial-data generators: bounded, divergence-free pairs on a grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .spectral import Grid, SpectralField, leray_project, sup_norm

__all__ = ["InitialSpec", "generate_initial"]

KINDS = ("orszag-tang", "random-divfree", "constant", "single-mode")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    amplitude: float = 0.5
    b_amplitude: float | None = None  # defaults to `amplitude`
    seed: int = 0
    slope: float = 1.0
    constant_value: float = 1.0
    mode: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown initial-data kind {self.kind!r}")


def _orszag_tang(grid: Grid, amplitude: float, b_amplitude: float):
    """The standard 2D vortex pair, rescaled to the box period."""
    if grid.dim != 2:
        raise ParameterError("orszag-tang data is two-dimensional")
    tx = 2.0 * np.pi * grid.coords[0] / grid.length
    ty = 2.0 * np.pi * grid.coords[1] / grid.length
    u = amplitude * np.stack([-np.sin(ty), np.sin(tx)])
    b = b_amplitude * np.stack([-np.sin(ty), np.sin(2.0 * tx)])
    return (
        SpectralField.from_physical(grid, u, divergence_free=True),
        SpectralField.from_physical(grid, b, divergence_free=True),
    )


def _random_divfree(grid: Grid, amplitude: float, rng: np.random.Generator, slope: float):
    """Random zero-mean field with exponentially decaying spectrum."""
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    hat = np.fft.fftn(noise, axes=tuple(range(1, grid.dim + 1)), norm="forward")
    kmag = np.sqrt(grid.k_squared)
    hat *= np.exp(-slope * kmag) * grid.dealias_mask
    hat[(slice(None),) + (0,) * grid.dim] = 0.0  # zero mean
    field = leray_project(SpectralField.from_spectral(grid, hat))
    scale = sup_norm(field)
    if scale == 0:
        return SpectralField.zeros(grid)
    return SpectralField.from_spectral(
        grid, field.spectral * (amplitude / scale), divergence_free=True
    )


def _single_mode(grid: Grid, mode: tuple[int, ...], amplitude: float):
    if mode is None or len(mode) != grid.dim:
        raise ParameterError(f"mode must have {grid.dim} integer components")
    k = np.asarray(mode, dtype=float)
    if not np.any(k):
        raise ParameterError("mode must be nonzero")
    if grid.dim == 2:
        perp = np.array([-k[1], k[0]])
    else:
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(k)))] = 1.0
        perp = np.cross(k, axis)
    perp /= np.linalg.norm(perp)
    phase = np.zeros(grid.shape)
    for j in range(grid.dim):
        phase = phase + 2.0 * np.pi * mode[j] * grid.coords[j] / grid.length
    u = amplitude * perp[(slice(None),) + (None,) * grid.dim] * np.cos(phase)
    return SpectralField.from_physical(grid, u, divergence_free=True)


def generate_initial(spec: InitialSpec, grid: Grid) -> tuple[SpectralField, SpectralField]:
    """Produce the (U0, B0) pair the given InitialSpec describes."""
    b_amp = spec.amplitude if spec.b_amplitude is None else spec.b_amplitude
    if spec.kind == "orszag-tang":
        return _orszag_tang(grid, spec.amplitude, b_amp)
    if spec.kind == "random-divfree":
        rng = np.random.Generator(np.random.Philox(key=np.array([spec.seed, 0], dtype=np.uint64)))
        u0 = _random_divfree(grid, spec.amplitude, rng, spec.slope)
        b0 = _random_divfree(grid, b_amp, rng, spec.slope)
        return u0, b0
    if spec.kind == "constant":
        arr = np.full((grid.dim,) + grid.shape, float(spec.constant_value))
        return (
            SpectralField.from_physical(grid, arr, divergence_free=True),
            SpectralField.zeros(grid),
        )
    if spec.kind == "single-mode":
        return _single_mode(grid, spec.mode, spec.amplitude), SpectralField.zeros(grid)
    raise ParameterError(f"unknown initial-data kind {spec.kind!r}")
