"""Periodic-box vector/scalar fields and the spectral operator toolbox.

Fields live on a uniform grid over [0, L)^D with D in {2, 3} and carry both a
physical-space sample array and a Fourier coefficient array, computed lazily
and cached.  The forward transform is normalized by 1/N^D so the coefficient
of a constant field equals that constant.  All operators below are pure: they
return new fields and never mutate their inputs (sample arrays are marked
read-only).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, ParameterError

__all__ = [
    "Grid",
    "SpectralField",
    "ScalarField",
    "heat_propagate",
    "partial_derivative",
    "divergence",
    "leray_project",
    "solve_total_pressure",
    "bmo_norm_estimate",
    "sup_norm",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: D dimensions, N points per axis, period L.

    The wavenumber lattice is the integer lattice scaled by 2*pi/L, in
    standard FFT ordering.
    """

    dim: int
    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ParameterError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ParameterError(f"n must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ParameterError(f"length must be positive, got {self.length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def axis_coords(self) -> np.ndarray:
        return _readonly(np.arange(self.n) * self.spacing)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """D coordinate arrays of shape ``self.shape`` (ij indexing)."""
        mesh = np.meshgrid(*([self.axis_coords] * self.dim), indexing="ij")
        return tuple(_readonly(m) for m in mesh)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis wavenumber arrays shaped for broadcasting."""
        k1 = 2.0 * np.pi / self.length * np.fft.fftfreq(self.n, d=1.0 / self.n)
        out = []
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = self.n
            out.append(_readonly(k1.reshape(shape)))
        return tuple(out)

    @cached_property
    def k_squared(self) -> np.ndarray:
        ks = self.wavenumbers[0] ** 2
        for k in self.wavenumbers[1:]:
            ks = ks + k**2
        return _readonly(np.broadcast_to(ks, self.shape).copy())

    @cached_property
    def k_squared_safe(self) -> np.ndarray:
        # |k|^2 with the zero mode replaced by 1 so it can divide safely
        ks = self.k_squared.copy()
        ks[(0,) * self.dim] = 1.0
        return _readonly(ks)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True on modes kept after quadratic products."""
        idx = np.fft.fftfreq(self.n, d=1.0 / self.n)
        keep = np.abs(idx) <= self.n // 3
        mask = np.ones(self.shape, dtype=bool)
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = self.n
            mask &= keep.reshape(shape)
        return _readonly(mask)


class _LazyDual:
    """Shared physical/Fourier caching for fields."""

    __slots__ = ("grid", "_phys", "_spec")

    def __init__(self, grid: Grid, phys: np.ndarray | None, spec: np.ndarray | None):
        self.grid = grid
        self._phys = None if phys is None else _readonly(np.asarray(phys, dtype=np.float64))
        self._spec = None if spec is None else _readonly(np.asarray(spec, dtype=np.complex128))

    @property
    def physical(self) -> np.ndarray:
        if self._phys is None:
            self._phys = _readonly(np.real(np.fft.ifftn(self._spec, axes=self._fft_axes(), norm="forward")))
        return self._phys

    @property
    def spectral(self) -> np.ndarray:
        if self._spec is None:
            self._spec = _readonly(np.fft.fftn(self._phys, axes=self._fft_axes(), norm="forward"))
        return self._spec

    def _fft_axes(self) -> tuple[int, ...]:
        raise NotImplementedError


class ScalarField(_LazyDual):
    """A real scalar field on a Grid, with lazy Fourier representation."""

    def __init__(self, grid, phys=None, spec=None):
        if phys is None and spec is None:
            raise ParameterError("one of phys/spec must be provided")
        expect = grid.shape
        arr = phys if phys is not None else spec
        if np.shape(arr) != expect:
            raise ParameterError(f"scalar field shape {np.shape(arr)} != grid shape {expect}")
        super().__init__(grid, phys, spec)

    def _fft_axes(self):
        return tuple(range(self.grid.dim))

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "ScalarField":
        return cls(grid, phys=samples)

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs: np.ndarray) -> "ScalarField":
        return cls(grid, spec=coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, phys=np.zeros(grid.shape))

    def mean(self) -> float:
        return float(np.real(self.spectral[(0,) * self.grid.dim]))

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField.from_spectral(self.grid, self.spectral - other.spectral)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField.from_spectral(self.grid, self.spectral + other.spectral)


class SpectralField(_LazyDual):
    """A real D-component vector field on a Grid.

    Component arrays are stacked along axis 0: physical shape (D, N, ..., N).
    ``divergence_free`` is a bookkeeping flag set by constructors that
    guarantee the property (e.g. the Leray projection).
    """

    __slots__ = ("divergence_free",)

    def __init__(self, grid, phys=None, spec=None, divergence_free=False):
        if phys is None and spec is None:
            raise ParameterError("one of phys/spec must be provided")
        expect = (grid.dim,) + grid.shape
        arr = phys if phys is not None else spec
        if np.shape(arr) != expect:
            raise ParameterError(f"vector field shape {np.shape(arr)} != {expect}")
        super().__init__(grid, phys, spec)
        self.divergence_free = bool(divergence_free)

    def _fft_axes(self):
        return tuple(range(1, self.grid.dim + 1))

    @classmethod
    def from_physical(cls, grid, samples, divergence_free=False) -> "SpectralField":
        return cls(grid, phys=samples, divergence_free=divergence_free)

    @classmethod
    def from_spectral(cls, grid, coeffs, divergence_free=False) -> "SpectralField":
        return cls(grid, spec=coeffs, divergence_free=divergence_free)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, phys=np.zeros((grid.dim,) + grid.shape), divergence_free=True)

    def component(self, j: int) -> np.ndarray:
        return self.physical[j]

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude on the grid."""
        return np.sqrt(np.sum(self.physical**2, axis=0))

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField.from_spectral(
            self.grid,
            self.spectral - other.spectral,
            divergence_free=self.divergence_free and other.divergence_free,
        )

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField.from_spectral(
            self.grid,
            self.spectral + other.spectral,
            divergence_free=self.divergence_free and other.divergence_free,
        )


Field = SpectralField | ScalarField


def _check_same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grids differ: {f.grid} vs {grid}")
    return grid


def heat_propagate(field: Field, diffusivity: float, t: float) -> Field:
    """Apply the heat semigroup: each mode k is damped by exp(-lam*|k|^2*t)."""
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    if not diffusivity > 0:
        raise ParameterError(f"diffusivity must be positive, got {diffusivity}")
    decay = np.exp(-diffusivity * field.grid.k_squared * t)
    if isinstance(field, SpectralField):
        return SpectralField.from_spectral(
            field.grid, field.spectral * decay, divergence_free=field.divergence_free
        )
    return ScalarField.from_spectral(field.grid, field.spectral * decay)


def partial_derivative(field: Field, axis: int) -> Field:
    """Spectral derivative along one axis: mode k is scaled by i*k_axis."""
    grid = field.grid
    if not 0 <= axis < grid.dim:
        raise ParameterError(f"axis {axis} out of range for dim {grid.dim}")
    mult = 1j * grid.wavenumbers[axis]
    if isinstance(field, SpectralField):
        return SpectralField.from_spectral(
            grid, field.spectral * mult, divergence_free=field.divergence_free
        )
    return ScalarField.from_spectral(grid, field.spectral * mult)


def divergence(field: SpectralField) -> ScalarField:
    """Sum of component derivatives, as a scalar field."""
    grid = field.grid
    spec = field.spectral
    acc = 1j * grid.wavenumbers[0] * spec[0]
    for j in range(1, grid.dim):
        acc = acc + 1j * grid.wavenumbers[j] * spec[j]
    return ScalarField.from_spectral(grid, acc)


def leray_project(field: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: (I - k k^T/|k|^2) per mode.

    The k = 0 (mean) mode is preserved unchanged.
    """
    grid = field.grid
    spec = field.spectral
    dot = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.dim):
        dot += grid.wavenumbers[j] * spec[j]
    dot /= grid.k_squared_safe
    out = np.empty_like(spec)
    for j in range(grid.dim):
        out[j] = spec[j] - grid.wavenumbers[j] * dot
    return SpectralField.from_spectral(grid, out, divergence_free=True)


def _dealiased_product_hat(a: np.ndarray, b: np.ndarray, grid: Grid, dealias: bool) -> np.ndarray:
    """Fourier transform of the pointwise product a*b, 2/3-rule truncated."""
    hat = np.fft.fftn(a * b, norm="forward")
    if dealias:
        hat = hat * grid.dealias_mask
    return hat


def solve_total_pressure(u: SpectralField, b: SpectralField, dealias: bool = True) -> ScalarField:
    """Solve for the mean-zero total pressure driven by the quadratic sources.

    Poisson problem: lap(P) = -d_j d_m (U_j U_m - B_j B_m), with products
    formed in physical space and dealiased.  Mode-wise this is
    P_hat(k) = -k_j k_m S_hat_jm(k) / |k|^2 for k != 0 and P_hat(0) = 0.
    """
    grid = _check_same_grid(u, b)
    up, bp = u.physical, b.physical
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.dim):
        for m in range(j, grid.dim):
            s_hat = _dealiased_product_hat(up[j], up[m], grid, dealias)
            s_hat -= _dealiased_product_hat(bp[j], bp[m], grid, dealias)
            weight = 2.0 if m != j else 1.0
            acc += weight * grid.wavenumbers[j] * grid.wavenumbers[m] * s_hat
    p_hat = -acc / grid.k_squared_safe
    p_hat[(0,) * grid.dim] = 0.0
    return ScalarField.from_spectral(grid, p_hat)


def bmo_norm_estimate(f: ScalarField) -> float:
    """Mean-oscillation sup over the axis-aligned dyadic cube family.

    Cubes have side lengths L/2, L/4, ..., L/N; each level partitions the
    box.  This is a lower bound on the true BMO norm, adequate for
    inequality-direction diagnostics.
    """
    grid = f.grid
    arr = f.physical
    n = grid.n
    best = 0.0
    blocks = 2
    while blocks <= n:
        pts = n // blocks
        # reshape to (blocks, pts) per axis, cube axes interleaved
        shape = []
        for _ in range(grid.dim):
            shape.extend([blocks, pts])
        view = arr.reshape(shape)
        point_axes = tuple(range(1, 2 * grid.dim, 2))
        means = view.mean(axis=point_axes, keepdims=True)
        osc = np.abs(view - means).mean(axis=point_axes)
        best = max(best, float(osc.max()))
        blocks *= 2
    return best


def sup_norm(field: Field) -> float:
    """Grid max of the Euclidean magnitude (vectors) or |f| (scalars)."""
    if isinstance(field, SpectralField):
        return float(field.magnitude().max())
    return float(np.abs(field.physical).max())
