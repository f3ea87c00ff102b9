"""Complex-strip evaluation and analyticity-radius diagnostics.

A band-limited real field extends entirely: F(x + iy) = sum over modes of
F_hat(k) exp(ik.x) exp(-k.y).  The strip check evaluates that extension on
shifts of magnitude rho(t) = sqrt(t)/(2 c4) and compares against the uniform
bound 2 beta c4 (|U0| + |B0|).  The radius estimator fits exponential decay
of the shell-maximum spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .directions import axis_plus_fibonacci
from .errors import HorizonError, ParameterError
from .mild import ConstantsLedger, MildSolution, existence_times
from .spectral import SpectralField, sup_norm

__all__ = [
    "ComplexShiftField",
    "StripBoundReport",
    "BAND_LIMITED_CAP",
    "complex_shift_evaluate",
    "rho_lower_bound",
    "strip_bound_check",
    "analyticity_radius_estimate",
    "shifted_pair_max",
]

# Returned by the radius estimator when the spectrum has too few populated
# shells to fit a decay rate (the field is band-limited, hence entire).
BAND_LIMITED_CAP = np.inf

_SHELL_FLOOR = 1e-13


@dataclass(frozen=True)
class ComplexShiftField:
    """Samples of the analytic extension at x + iy for one fixed shift y."""

    grid: object
    shift: tuple[float, ...]
    values: np.ndarray  # complex, shape (D, N, ..., N)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude of the complex vector."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))

    def sup_modulus(self) -> float:
        return float(self.magnitude().max())


def complex_shift_evaluate(field: SpectralField, shift) -> ComplexShiftField:
    """Evaluate the analytic extension of a band-limited field at x + iy.

    Mode k is scaled by exp(-k.y) before the inverse transform.  Fields
    carrying content at the unpaired Nyquist frequency get the one-sided
    interpretation of that mode; smooth (dealiased) fields are unaffected.
    """
    grid = field.grid
    y = np.asarray(shift, dtype=np.float64)
    if y.shape != (grid.dim,):
        raise ParameterError(f"shift must have {grid.dim} components")
    if not np.all(np.isfinite(y)):
        raise ParameterError("shift must be finite")
    phase = np.zeros(grid.shape)
    for j in range(grid.dim):
        phase = phase + grid.wavenumbers[j] * y[j]
    scaled = field.spectral * np.exp(-phase)
    values = np.fft.ifftn(scaled, axes=tuple(range(1, grid.dim + 1)), norm="forward")
    return ComplexShiftField(grid=grid, shift=tuple(float(v) for v in y), values=values)


def rho_lower_bound(t: float, c4: float) -> float:
    """Strip half-width guaranteed at time t: sqrt(t) / (2 c4)."""
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    if not c4 > 0:
        raise ParameterError(f"c4 must be positive, got {c4}")
    return np.sqrt(t) / (2.0 * c4)


def shifted_pair_max(
    u: SpectralField, b: SpectralField, radius: float, n_directions: int
) -> float:
    """Max over sampled shifts |y| = radius of |u+iv| + |b+ic| on the grid."""
    if radius == 0.0:
        return sup_norm(u) + sup_norm(b)
    dirs = axis_plus_fibonacci(u.grid.dim, n_directions)
    worst = 0.0
    for d in dirs:
        y = radius * d
        mu = complex_shift_evaluate(u, y).magnitude()
        mb = complex_shift_evaluate(b, y).magnitude()
        worst = max(worst, float((mu + mb).max()))
    return worst


@dataclass(frozen=True)
class StripBoundReport:
    beta: float
    times: tuple[float, ...]
    rho: tuple[float, ...]
    measured: tuple[float, ...]  # per time, max over sampled shifts
    bound: float
    passed: bool
    directions: int


def strip_bound_check(
    solution: MildSolution,
    beta: float,
    ledger: ConstantsLedger,
    shift_samples: int = 16,
) -> StripBoundReport:
    """Verify the uniform extension bound on a computed solution.

    For every stored time t, the extension of (U, B) is sampled on
    `shift_samples` directions at |y| = rho(t) and the summed moduli are
    compared against 2 beta c4 (|U0| + |B0|).
    """
    if not 0.5 < beta <= 1.0:
        raise ParameterError(f"beta must lie in (1/2, 1], got {beta}")
    u0n, b0n = solution.norms_at(0)
    a = u0n + b0n
    horizons = existence_times(u0n, b0n, ledger)
    window = min(solution.horizon, horizons.t_beta(beta))
    for t in solution.times:
        if t > window * (1.0 + 1e-12):
            raise HorizonError(
                f"stored time {t} exceeds the analyticity window t_beta = {window}"
            )
    bound = 2.0 * beta * ledger.c4 * a
    rho_vals, measured = [], []
    for t, uf, bf in zip(solution.times, solution.u, solution.b):
        rho = rho_lower_bound(t, ledger.c4)
        rho_vals.append(rho)
        measured.append(shifted_pair_max(uf, bf, rho, shift_samples))
    passed = all(m <= bound * (1.0 + 1e-12) for m in measured)
    return StripBoundReport(
        beta=beta,
        times=solution.times,
        rho=tuple(rho_vals),
        measured=tuple(measured),
        bound=bound,
        passed=passed,
        directions=shift_samples,
    )


def analyticity_radius_estimate(field: SpectralField) -> float:
    """Empirical decay rate of the shell-maximum Fourier spectrum.

    Least-squares slope of log max-amplitude against |k| over the populated
    shells; clamped at zero.  Returns BAND_LIMITED_CAP when fewer than three
    shells rise above the floor.
    """
    grid = field.grid
    spec = field.spectral
    amp = np.max(np.abs(spec), axis=0)
    if not amp.max() > 0:
        raise ParameterError("field is identically zero")
    k0 = 2.0 * np.pi / grid.length
    kmag = np.sqrt(grid.k_squared)
    shell = np.rint(kmag / k0).astype(int)
    n_shells = shell.max() + 1
    ks, logs = [], []
    flat_shell = shell.ravel()
    flat_amp = amp.ravel()
    flat_k = kmag.ravel()
    for s in range(n_shells):
        sel = flat_shell == s
        if not sel.any():
            continue
        sub = flat_amp[sel]
        j = int(np.argmax(sub))
        if sub[j] <= _SHELL_FLOOR:
            continue
        ks.append(flat_k[sel][j])
        logs.append(np.log(sub[j]))
    if len(ks) < 3:
        return BAND_LIMITED_CAP
    slope = np.polyfit(np.asarray(ks), np.asarray(logs), 1)[0]
    return max(0.0, -float(slope))
