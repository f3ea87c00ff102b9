"""Successive-approximation construction of mild MHD solutions.

The solver builds the integral (Duhamel) form of the viscous/resistive MHD
system on a periodic box: each approximation level is the heat flow of the
initial data minus time-quadrature of propagated quadratic fluxes and the
total-pressure gradient, with the whole time interval recomputed per level.
Existence-time formulas, uniform-bound and contraction diagnostics, and the
empirical calibration of the non-explicit constants live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, ParameterError
from .spectral import (
    Grid,
    ScalarField,
    SpectralField,
    divergence,
    solve_total_pressure,
    sup_norm,
)

__all__ = [
    "SolverParams",
    "ConstantsLedger",
    "ExistenceTimes",
    "MildSolution",
    "ContractionReport",
    "Lemma4Report",
    "MagneticBoundReport",
    "existence_times",
    "scheme_step",
    "picard_solve",
    "lemma4_bound_check",
    "corollary6_check",
    "calibrate_constants",
]

UNBOUNDED = math.inf

# Convergence is declared when the max-over-time sup-norm increment between
# consecutive levels falls below this.
DEFAULT_TOL = 1e-10
DEFAULT_LEVEL_CAP = 60


@dataclass(frozen=True)
class SolverParams:
    """Diffusivities, grid, and quadrature resolution for the iteration."""

    grid: Grid
    nu: float = 1.0
    mu: float = 1.0
    substeps: int = 16
    dealias: bool = True

    def __post_init__(self):
        if not self.nu > 0:
            raise ParameterError(f"nu must be positive, got {self.nu}")
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if self.substeps < 4:
            raise ParameterError(f"substeps must be >= 4, got {self.substeps}")


@dataclass(frozen=True)
class ConstantsLedger:
    """The four bound constants with per-constant provenance tags.

    All constants are required to be >= 1; smaller values are rejected
    rather than silently clamped.
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    provenance: tuple[str, str, str, str] = ("default",) * 4

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4"):
            if not getattr(self, name) >= 1.0:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if len(self.provenance) != 4:
            raise ParameterError("provenance needs one tag per constant")

    @property
    def c_mu(self) -> float:
        """Magnetic-bound constant; identified with c3."""
        return self.c3


@dataclass(frozen=True)
class ExistenceTimes:
    """Computed horizons.  `UNBOUNDED` (inf) marks the zero-data case.

    t1: uniform-bound horizon       1 / (4 A^2)
    t2: contraction horizon         1 / (4 c1 c2 A)^2
    t4: strip-bound horizon         1 / (16 c4^4 A^2)
    t_beta(beta): scaled horizon    ((2 beta - 1)^2 / beta^4) * t4
    t3(|U|, horizon): magnetic horizon from the realized velocity norm
    """

    t1: float
    t2: float
    t4: float
    c_mu: float

    def t_beta(self, beta: float) -> float:
        if not 0.5 < beta <= 1.0:
            raise ParameterError(f"beta must lie in (1/2, 1], got {beta}")
        return (2.0 * beta - 1.0) ** 2 / beta**4 * self.t4

    def t3(self, realized_u_norm: float, horizon: float) -> float:
        if realized_u_norm < 0:
            raise ParameterError("realized velocity norm must be nonnegative")
        if realized_u_norm == 0:
            return horizon
        return min(horizon, 1.0 / (16.0 * self.c_mu**2 * realized_u_norm**2))


def existence_times(u0_norm: float, b0_norm: float, ledger: ConstantsLedger) -> ExistenceTimes:
    """Evaluate the printed horizon formulas for data of the given norms."""
    if u0_norm < 0 or b0_norm < 0:
        raise ParameterError("norms must be nonnegative")
    a = u0_norm + b0_norm
    if a == 0:
        return ExistenceTimes(UNBOUNDED, UNBOUNDED, UNBOUNDED, ledger.c_mu)
    return ExistenceTimes(
        t1=1.0 / (4.0 * a**2),
        t2=1.0 / (4.0 * ledger.c1 * ledger.c2 * a) ** 2,
        t4=1.0 / (16.0 * ledger.c4**4 * a**2),
        c_mu=ledger.c_mu,
    )


@dataclass(frozen=True)
class MildSolution:
    """One converged (or explicitly diverged) run of the iteration."""

    times: tuple[float, ...]
    u: tuple[SpectralField, ...]
    b: tuple[SpectralField, ...]
    pressure: tuple[ScalarField, ...]
    history: tuple[tuple[float, float], ...]  # per level: (sup U, sup B) over all times
    status: str  # "converged" | "diverged"
    levels: int

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def norms_at(self, i: int) -> tuple[float, float]:
        return sup_norm(self.u[i]), sup_norm(self.b[i])


@dataclass(frozen=True)
class ContractionReport:
    """Per-level increments and the fitted geometric decay envelope."""

    increments: tuple[float, ...]
    alpha_hat: float
    converged: bool
    t2: float | None = None
    t2_exceeded: bool | None = None
    lemma4_ok_per_level: tuple[bool, ...] | None = None


def _require_divergence_free(f: SpectralField, name: str) -> None:
    scale = sup_norm(f)
    if scale == 0:
        return
    if sup_norm(divergence(f)) > 1e-8 * scale:
        raise ParameterError(f"{name} is not divergence-free to tolerance")


def _forcings(
    u_fields: list[SpectralField],
    b_fields: list[SpectralField],
    p_fields: list[ScalarField],
    params: SolverParams,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Fourier-space flux divergences feeding the Duhamel integrals.

    For each time node, returns g_u and g_b with components
      g_u[c] = -i k_j S_hat[j,c] - i k_c P_hat,   S = UU - BB (dealiased)
      g_b[c] = -i k_j T_hat[j,c],                 T = UB - BU (dealiased)
    """
    grid = params.grid
    kvec = grid.wavenumbers
    mask = grid.dealias_mask if params.dealias else None
    g_u, g_b = [], []
    for u_f, b_f, p_f in zip(u_fields, b_fields, p_fields):
        up, bp = u_f.physical, b_f.physical
        gu = np.zeros((grid.dim,) + grid.shape, dtype=np.complex128)
        gb = np.zeros_like(gu)
        for c in range(grid.dim):
            for j in range(grid.dim):
                s_hat = np.fft.fftn(up[j] * up[c] - bp[j] * bp[c], norm="forward")
                t_hat = np.fft.fftn(up[j] * bp[c] - bp[j] * up[c], norm="forward")
                if mask is not None:
                    s_hat *= mask
                    t_hat *= mask
                gu[c] += -1j * kvec[j] * s_hat
                gb[c] += -1j * kvec[j] * t_hat
            gu[c] += -1j * kvec[c] * p_f.spectral
        g_u.append(gu)
        g_b.append(gb)
    return g_u, g_b


def _decay_table(grid: Grid, diffusivity: float, delta: float, count: int) -> list[np.ndarray]:
    return [np.exp(-diffusivity * grid.k_squared * (d * delta)) for d in range(count)]


def _duhamel_at(
    base_hat: np.ndarray,
    forcings: list[np.ndarray],
    decays: list[np.ndarray],
    delta: float,
    i: int,
) -> np.ndarray:
    """Heat flow of the data plus trapezoid quadrature of propagated forcing."""
    out = decays[i] * base_hat
    if i == 0:
        return out
    acc = 0.5 * (decays[i] * forcings[0] + forcings[i])
    for j in range(1, i):
        acc += decays[i - j] * forcings[j]
    return out + delta * acc


def scheme_step(
    u_prev: list[SpectralField],
    b_prev: list[SpectralField],
    p_prev: list[ScalarField],
    u0: SpectralField,
    b0: SpectralField,
    params: SolverParams,
    t: float,
) -> tuple[SpectralField, SpectralField, ScalarField]:
    """Advance one approximation level to time t.

    The previous level is given on the uniform node grid spanning [0, t]
    (len(u_prev) nodes).  Returns the next level's velocity, magnetic field,
    and total pressure at t.
    """
    n = len(u_prev)
    if n == 0:
        raise ParameterError("empty node grid")
    if not (len(b_prev) == len(p_prev) == n):
        raise ParameterError("node lists must have equal length")
    grid = params.grid
    for f in (*u_prev, *b_prev, *p_prev, u0, b0):
        if f.grid != grid:
            raise ParameterError("all fields must live on the solver grid")
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    if t == 0:
        return u0, b0, solve_total_pressure(u0, b0, params.dealias)
    if n < 2:
        raise ParameterError("node grid must contain at least two nodes for t > 0")

    delta = t / (n - 1)
    g_u, g_b = _forcings(u_prev, b_prev, p_prev, params)
    dec_u = _decay_table(grid, params.nu, delta, n)
    dec_b = _decay_table(grid, params.mu, delta, n)
    u_hat = _duhamel_at(u0.spectral, g_u, dec_u, delta, n - 1)
    b_hat = _duhamel_at(b0.spectral, g_b, dec_b, delta, n - 1)
    u_next = SpectralField.from_spectral(grid, u_hat, divergence_free=True)
    b_next = SpectralField.from_spectral(grid, b_hat, divergence_free=True)
    return u_next, b_next, solve_total_pressure(u_next, b_next, params.dealias)


def picard_solve(
    u0: SpectralField,
    b0: SpectralField,
    params: SolverParams,
    t_end: float,
    n_max: int = DEFAULT_LEVEL_CAP,
    tol: float = DEFAULT_TOL,
    ledger: ConstantsLedger | None = None,
) -> tuple[MildSolution, ContractionReport]:
    """Iterate the approximation scheme until levels stop moving.

    Non-convergence within `n_max` levels yields status "diverged" (never a
    silently truncated "converged").  When a ledger is supplied, per-level
    uniform-bound compliance and the contraction horizon t2 are recorded.
    """
    grid = params.grid
    if u0.grid != grid or b0.grid != grid:
        raise ParameterError("initial data must live on the solver grid")
    if not t_end > 0:
        raise ParameterError(f"horizon must be positive, got {t_end}")
    _require_divergence_free(u0, "u0")
    _require_divergence_free(b0, "b0")

    n = params.substeps
    times = np.linspace(0.0, t_end, n)
    delta = times[1] - times[0]
    dec_u = _decay_table(grid, params.nu, delta, n)
    dec_b = _decay_table(grid, params.mu, delta, n)

    u0_norm, b0_norm = sup_norm(u0), sup_norm(b0)
    p0 = solve_total_pressure(u0, b0, params.dealias)
    zeros_v = SpectralField.zeros(grid)
    zeros_s = ScalarField.zeros(grid)
    prev_u = [zeros_v] * n
    prev_b = [zeros_v] * n
    prev_p = [zeros_s] * n

    bound = None
    if ledger is not None:
        bound = 2.0 * ledger.c1 * (u0_norm + b0_norm)

    increments: list[float] = []
    history: list[tuple[float, float]] = []
    lemma4_flags: list[bool] = []
    status = "diverged"
    levels = 0

    for level in range(1, n_max + 1):
        levels = level
        g_u, g_b = _forcings(prev_u, prev_b, prev_p, params)
        new_u = [u0]
        new_b = [b0]
        new_p = [p0]
        for i in range(1, n):
            u_hat = _duhamel_at(u0.spectral, g_u, dec_u, delta, i)
            b_hat = _duhamel_at(b0.spectral, g_b, dec_b, delta, i)
            uf = SpectralField.from_spectral(grid, u_hat, divergence_free=True)
            bf = SpectralField.from_spectral(grid, b_hat, divergence_free=True)
            new_u.append(uf)
            new_b.append(bf)
            new_p.append(solve_total_pressure(uf, bf, params.dealias))

        inc = max(sup_norm(a - b) for a, b in zip(new_u, prev_u)) + max(
            sup_norm(a - b) for a, b in zip(new_b, prev_b)
        )
        increments.append(inc)
        level_u = max(sup_norm(f) for f in new_u)
        level_b = max(sup_norm(f) for f in new_b)
        history.append((level_u, level_b))
        if bound is not None:
            lemma4_flags.append(level_u + level_b <= bound * (1.0 + 1e-12))

        prev_u, prev_b, prev_p = new_u, new_b, new_p
        if inc < tol:
            status = "converged"
            break
        if not np.isfinite(inc):
            break

    solution = MildSolution(
        times=tuple(float(t) for t in times),
        u=tuple(prev_u),
        b=tuple(prev_b),
        pressure=tuple(prev_p),
        history=tuple(history),
        status=status,
        levels=levels,
    )

    floor = max(10.0 * tol, 1e-13 * max(increments, default=0.0))
    ratios = [
        increments[i + 1] / increments[i]
        for i in range(len(increments) - 1)
        if increments[i] > floor
    ]
    alpha_hat = max(ratios) if ratios else 0.0

    t2 = t2_exceeded = None
    if ledger is not None:
        t2 = existence_times(u0_norm, b0_norm, ledger).t2
        t2_exceeded = t_end >= t2
    report = ContractionReport(
        increments=tuple(increments),
        alpha_hat=alpha_hat,
        converged=(status == "converged"),
        t2=t2,
        t2_exceeded=t2_exceeded,
        lemma4_ok_per_level=tuple(lemma4_flags) if bound is not None else None,
    )
    return solution, report


@dataclass(frozen=True)
class Lemma4Report:
    passed: bool
    bound: float
    level_sums: tuple[float, ...]
    worst_level: int


def lemma4_bound_check(
    history: tuple[tuple[float, float], ...],
    u0_norm: float,
    b0_norm: float,
    ledger: ConstantsLedger,
) -> Lemma4Report:
    """Check sup|U| + sup|B| <= 2 c1 (|U0| + |B0|) at every level."""
    if len(history) == 0:
        raise ParameterError("history must be nonempty")
    bound = 2.0 * ledger.c1 * (u0_norm + b0_norm)
    sums = tuple(u + b for u, b in history)
    worst = int(np.argmax(sums))
    return Lemma4Report(
        passed=all(s <= bound * (1.0 + 1e-12) for s in sums),
        bound=bound,
        level_sums=sums,
        worst_level=worst,
    )


@dataclass(frozen=True)
class MagneticBoundReport:
    passed: bool
    t3: float
    bound: float
    max_b: float
    realized_u: float


def _corollary6_core(
    times: np.ndarray,
    u_sups: np.ndarray,
    b_sups: np.ndarray,
    b0_norm: float,
    c3: float,
    horizon: float,
) -> MagneticBoundReport:
    realized_u = float(u_sups.max()) if len(u_sups) else 0.0
    if realized_u == 0:
        t3 = horizon
    else:
        t3 = min(horizon, 1.0 / (16.0 * c3**2 * realized_u**2))
    in_window = times <= t3 * (1.0 + 1e-12)
    max_b = float(b_sups[in_window].max()) if in_window.any() else 0.0
    bound = 2.0 * c3 * b0_norm
    return MagneticBoundReport(
        passed=max_b <= bound * (1.0 + 1e-12),
        t3=t3,
        bound=bound,
        max_b=max_b,
        realized_u=realized_u,
    )


def corollary6_check(
    solution: MildSolution, b0_norm: float, ledger: ConstantsLedger
) -> MagneticBoundReport:
    """Check sup|B| <= 2 c3 |B0| over stored times within the t3 window.

    t3 is evaluated from the realized velocity norm of the computed solution.
    """
    times = np.asarray(solution.times)
    u_sups = np.array([sup_norm(f) for f in solution.u])
    b_sups = np.array([sup_norm(f) for f in solution.b])
    return _corollary6_core(times, u_sups, b_sups, b0_norm, ledger.c3, solution.horizon)


def _ceil_tenth(x: float) -> float:
    return max(1.0, math.ceil(x * 10.0 - 1e-9) / 10.0)


# Calibration enforces a contraction envelope slightly above sqrt(1/2), the
# factor the horizon formula implies at half the contraction horizon.
_CALIBRATION_ALPHA = 0.71


def calibrate_constants(
    sample_data: list[tuple[SpectralField, SpectralField]],
    params: SolverParams,
    n_max: int = 40,
    tol: float = DEFAULT_TOL,
    cap: float = 32.0,
    strip_directions: int = 8,
) -> ConstantsLedger:
    """Fit the smallest workable constants (>= 1, one-decimal grid) to data.

    c1 comes from the realized per-level uniform bounds at the t1 horizon;
    c2 is grown until the iteration contracts at half the implied t2; c3
    until the magnetic bound holds; c4 until the strip bound at beta=1 holds
    on sampled complex shifts.  Failure up to `cap` raises CalibrationError
    carrying the offending sample.
    """
    from .analyticity import rho_lower_bound, shifted_pair_max

    if not sample_data:
        raise ParameterError("sample_data must be nonempty")
    live = []
    for idx, (u0f, b0f) in enumerate(sample_data):
        if u0f.grid != params.grid or b0f.grid != params.grid:
            raise ParameterError(f"sample {idx} not on the solver grid")
        a = sup_norm(u0f) + sup_norm(b0f)
        if a > 0:
            live.append((idx, u0f, b0f, a))

    if not live:
        return ConstantsLedger(provenance=("calibrated",) * 4)

    # c1: realized uniform-bound constant at the t1 horizon
    c1_need = 1.0
    for idx, u0f, b0f, a in live:
        t1 = 1.0 / (4.0 * a**2)
        sol, _ = picard_solve(u0f, b0f, params, t1, n_max=n_max, tol=tol)
        worst = max(u + b for u, b in sol.history)
        if not np.isfinite(worst):
            raise CalibrationError("iteration blew up at the t1 horizon", idx)
        c1_need = max(c1_need, worst / (2.0 * a))
    c1 = _ceil_tenth(c1_need)

    # c2: smallest value whose implied contraction horizon actually contracts
    c2 = 1.0
    solutions: dict[int, MildSolution] = {}
    while True:
        ok = True
        for idx, u0f, b0f, a in live:
            t2 = 1.0 / (4.0 * c1 * c2 * a) ** 2
            sol, rep = picard_solve(u0f, b0f, params, t2 / 2.0, n_max=n_max, tol=tol)
            if not (rep.converged and rep.alpha_hat <= _CALIBRATION_ALPHA):
                ok = False
                bad = idx
                break
            solutions[idx] = sol
        if ok:
            break
        c2 = round(c2 + 0.1, 10)
        if c2 > cap:
            raise CalibrationError("no contraction constant below cap", bad)

    # c3: magnetic uniform bound on the contraction-horizon solutions
    c3 = 1.0
    while True:
        ok = True
        for idx, u0f, b0f, a in live:
            rep = corollary6_check(
                solutions[idx], sup_norm(b0f), ConstantsLedger(c1, c2, c3, 1.0)
            )
            if not rep.passed:
                ok = False
                bad = idx
                break
        if ok:
            break
        c3 = round(c3 + 0.1, 10)
        if c3 > cap:
            raise CalibrationError("no magnetic-bound constant below cap", bad)

    # c4: strip bound at beta = 1 on stored times inside the t4 window
    c4 = 1.0
    while True:
        ok = True
        for idx, u0f, b0f, a in live:
            sol = solutions[idx]
            t4 = 1.0 / (16.0 * c4**4 * a**2)
            bound = 2.0 * c4 * a
            for t, uf, bf in zip(sol.times, sol.u, sol.b):
                if t <= 0 or t > t4:
                    continue
                measured = shifted_pair_max(uf, bf, rho_lower_bound(t, c4), strip_directions)
                if measured > bound * (1.0 + 1e-12):
                    ok = False
                    bad = idx
                    break
            if not ok:
                break
        if ok:
            break
        c4 = round(c4 + 0.1, 10)
        if c4 > cap:
            raise CalibrationError("no strip-bound constant below cap", bad)

    return ConstantsLedger(c1, c2, c3, c4, provenance=("calibrated",) * 4)
