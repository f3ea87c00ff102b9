"""Independent time-marching integrator used to cross-check the iteration.

Structurally different route to the same dynamics: advective-form
nonlinearity, pressure eliminated by projection, classical fourth-order
Runge-Kutta with an integrating factor for the diffusion.  Kept free of the
Duhamel-quadrature code on purpose.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .mild import SolverParams
from .spectral import SpectralField

__all__ = ["rk4_reference"]


def _nonlinear(u_hat, b_hat, params):
    """Projected advective right-hand sides in Fourier space."""
    grid = params.grid
    kvec = grid.wavenumbers
    axes = tuple(range(1, grid.dim + 1))
    u = np.real(np.fft.ifftn(u_hat, axes=axes, norm="forward"))
    b = np.real(np.fft.ifftn(b_hat, axes=axes, norm="forward"))
    du = [
        np.real(np.fft.ifftn(1j * kvec[j] * u_hat, axes=axes, norm="forward"))
        for j in range(grid.dim)
    ]
    db = [
        np.real(np.fft.ifftn(1j * kvec[j] * b_hat, axes=axes, norm="forward"))
        for j in range(grid.dim)
    ]
    rhs_u = np.zeros(u.shape)
    rhs_b = np.zeros(b.shape)
    for c in range(grid.dim):
        for j in range(grid.dim):
            rhs_u[c] += -u[j] * du[j][c] + b[j] * db[j][c]
            rhs_b[c] += -u[j] * db[j][c] + b[j] * du[j][c]
    nu_hat = np.fft.fftn(rhs_u, axes=axes, norm="forward")
    nb_hat = np.fft.fftn(rhs_b, axes=axes, norm="forward")
    if params.dealias:
        nu_hat *= grid.dealias_mask
        nb_hat *= grid.dealias_mask
    # Leray projection of both right-hand sides (identity on the magnetic
    # one up to roundoff, and it absorbs the pressure gradient on the
    # velocity one)
    for hat in (nu_hat, nb_hat):
        dot = np.zeros(grid.shape, dtype=np.complex128)
        for j in range(grid.dim):
            dot += kvec[j] * hat[j]
        dot /= grid.k_squared_safe
        for j in range(grid.dim):
            hat[j] -= kvec[j] * dot
    return nu_hat, nb_hat


def rk4_reference(
    u0: SpectralField,
    b0: SpectralField,
    params: SolverParams,
    t_end: float,
    steps: int,
) -> tuple[SpectralField, SpectralField]:
    """March the system to t_end with integrating-factor RK4."""
    grid = params.grid
    if u0.grid != grid or b0.grid != grid:
        raise ParameterError("initial data must live on the solver grid")
    if not t_end > 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    if steps < 1:
        raise ParameterError(f"steps must be positive, got {steps}")
    dt = t_end / steps
    e_u = np.exp(-params.nu * grid.k_squared * dt / 2.0)
    e_b = np.exp(-params.mu * grid.k_squared * dt / 2.0)
    u_hat = u0.spectral.copy()
    b_hat = b0.spectral.copy()
    for _ in range(steps):
        k1u, k1b = _nonlinear(u_hat, b_hat, params)
        k2u, k2b = _nonlinear(e_u * (u_hat + 0.5 * dt * k1u), e_b * (b_hat + 0.5 * dt * k1b), params)
        k3u, k3b = _nonlinear(e_u * u_hat + 0.5 * dt * k2u, e_b * b_hat + 0.5 * dt * k2b, params)
        k4u, k4b = _nonlinear(e_u**2 * u_hat + dt * e_u * k3u, e_b**2 * b_hat + dt * e_b * k3b, params)
        u_hat = e_u**2 * u_hat + dt / 6.0 * (e_u**2 * k1u + 2.0 * e_u * (k2u + k3u) + k4u)
        b_hat = e_b**2 * b_hat + dt / 6.0 * (e_b**2 * k1b + 2.0 * e_b * (k2b + k3b) + k4b)
    return (
        SpectralField.from_spectral(grid, u_hat, divergence_free=True),
        SpectralField.from_spectral(grid, b_hat, divergence_free=True),
    )
