"""Deterministic unit-direction sets used by scans and strip checks."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_directions(dim: int, count: int) -> np.ndarray:
    """Quasi-uniform unit vectors with antipodal pairs deduplicated.

    2D: equispaced angles over [0, pi).  3D: Fibonacci points on the upper
    hemisphere.  Returns an array of shape (count, dim).
    """
    if count < 1:
        raise ParameterError(f"direction count must be positive, got {count}")
    if dim == 2:
        theta = np.arange(count) * np.pi / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        i = np.arange(count)
        z = (i + 0.5) / count  # upper hemisphere only; -d is redundant
        rho = np.sqrt(1.0 - z**2)
        phi = i * _GOLDEN_ANGLE
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    raise ParameterError(f"dim must be 2 or 3, got {dim}")


def axis_plus_fibonacci(dim: int, count: int) -> np.ndarray:
    """The coordinate axes followed by Fibonacci fill, `count` total."""
    if count < dim:
        raise ParameterError(f"need at least {dim} directions, got {count}")
    axes = np.eye(dim)
    if count == dim:
        return axes
    return np.concatenate([axes, fibonacci_directions(dim, count - dim)], axis=0)
