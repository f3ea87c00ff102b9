"""Harmonic measure on the disk minus a diameter slit set.

Closed forms: the sharp arcsin lower bound for the harmonic measure at the
origin of a closed subset of the diameter, attained by the symmetric edge
configuration.  Estimator: walk-on-spheres Brownian motion with an
absorption layer, counter-based RNG, and batch-reproducible seeding.  The
two-constant interpolation bound used by the certification chains also
lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "SlitSet",
    "HarmonicMeasureEstimate",
    "solynin_h",
    "solynin_lower_bound",
    "extremal_slits",
    "mc_harmonic_measure",
    "max_principle_bound",
]

# Walks are processed in fixed-size batches, each drawing from its own
# counter-based stream keyed by (seed, batch index).  Results are therefore
# identical for a given seed no matter how batches are scheduled.
_BATCH = 1 << 15
_TIE_EPS = 1e-12
_MAX_ROUNDS = 1_000_000


@dataclass(frozen=True)
class SlitSet:
    """Disjoint closed subintervals of the diameter [-r, r] of a disk."""

    radius: float
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"radius must be positive, got {self.radius}")
        prev_end = None
        for a, b in self.intervals:
            if a > b:
                raise ParameterError(f"interval [{a}, {b}] is reversed")
            if a < -self.radius or b > self.radius:
                raise ParameterError(f"interval [{a}, {b}] leaves [-r, r]")
            if prev_end is not None and a <= prev_end:
                raise ParameterError("intervals must be sorted and disjoint")
            prev_end = b

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorized Euclidean distance from points (x, y) to the set."""
        if self.is_empty:
            return np.full(np.shape(x), np.inf)
        d = np.full(np.shape(x), np.inf)
        for a, b in self.intervals:
            dx = np.maximum(np.maximum(a - x, x - b), 0.0)
            d = np.minimum(d, np.hypot(dx, y))
        return d

    def rescaled(self, factor: float) -> "SlitSet":
        return SlitSet(
            radius=self.radius * factor,
            intervals=tuple((a * factor, b * factor) for a, b in self.intervals),
        )


def solynin_h(delta: float) -> float:
    """(2/pi) arcsin((1 - delta^2) / (1 + delta^2)) for delta in (0, 1)."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    return 2.0 / math.pi * math.asin((1.0 - delta**2) / (1.0 + delta**2))


def solynin_lower_bound(gamma: float) -> float:
    """Sharp lower bound for sets of measure 2*gamma on the unit diameter."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    return solynin_h(1.0 - gamma)


def extremal_slits(gamma: float, radius: float = 1.0) -> SlitSet:
    """The symmetric edge configuration attaining the lower bound."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    r = radius
    return SlitSet(
        radius=r,
        intervals=((-r, (-1.0 + gamma) * r), ((1.0 - gamma) * r, r)),
    )


@dataclass(frozen=True)
class HarmonicMeasureEstimate:
    mean: float
    standard_error: float
    walks: int
    step: float
    seed: int
    hits_set: int
    hits_circle: int

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ParameterError("estimate must lie in [0, 1]")


def _walk_batch(slits: SlitSet, count: int, step: float, seed: int, batch: int) -> int:
    """Run one batch of walks from the origin; return the slit-hit count."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, batch], dtype=np.uint64)))
    r = slits.radius
    x = np.zeros(count)
    y = np.zeros(count)
    hits = 0
    for _ in range(_MAX_ROUNDS):
        d_circle = r - np.hypot(x, y)
        d_set = slits.distance(x, y)
        radius = np.minimum(d_circle, d_set)
        absorbed = radius < step
        if absorbed.any():
            dc = d_circle[absorbed]
            ds = d_set[absorbed]
            # nearest set wins; near-ties go to the slit set
            to_set = ds <= dc + _TIE_EPS * r
            hits += int(np.count_nonzero(to_set))
            keep = ~absorbed
            x, y, radius = x[keep], y[keep], radius[keep]
        if x.size == 0:
            return hits
        theta = rng.uniform(0.0, 2.0 * np.pi, size=x.size)
        x = x + radius * np.cos(theta)
        y = y + radius * np.sin(theta)
    raise RuntimeError("walk-on-spheres failed to terminate")


def mc_harmonic_measure(
    slits: SlitSet, walks: int, step: float | None = None, seed: int = 0
) -> HarmonicMeasureEstimate:
    """Estimate the harmonic measure of the slit set seen from the origin.

    Planar Brownian motion started at 0 is advanced by walk-on-spheres with
    sphere radius the distance to (set union circle); a walk is absorbed
    once within `step` of either boundary piece and attributed to the nearer
    one.  The fraction hitting the set before the circle is returned with
    its binomial standard error.
    """
    if walks < 10_000:
        raise ParameterError(f"walks must be >= 10^4, got {walks}")
    if slits.contains(0.0):
        raise ParameterError("the origin must lie outside the slit set")
    if step is None:
        step = slits.radius * 1e-4
    if not 0 < step < slits.radius:
        raise ParameterError(f"step must lie in (0, radius), got {step}")
    if slits.is_empty:
        return HarmonicMeasureEstimate(
            mean=0.0,
            standard_error=0.0,
            walks=walks,
            step=step,
            seed=seed,
            hits_set=0,
            hits_circle=walks,
        )
    hits = 0
    done = 0
    batch = 0
    while done < walks:
        count = min(_BATCH, walks - done)
        hits += _walk_batch(slits, count, step, seed, batch)
        done += count
        batch += 1
    mean = hits / walks
    se = math.sqrt(mean * (1.0 - mean) / walks)
    return HarmonicMeasureEstimate(
        mean=mean,
        standard_error=se,
        walks=walks,
        step=step,
        seed=seed,
        hits_set=hits,
        hits_circle=walks - hits,
    )


def max_principle_bound(small: float, big: float, omega: float) -> float:
    """Two-constant interpolation: small^omega * big^(1-omega).

    Requires small <= big so the bound improves as omega grows.
    """
    if not (small > 0 and big > 0):
        raise ParameterError("bounds must be positive")
    if not 0.0 <= omega <= 1.0:
        raise ParameterError(f"omega must lie in [0, 1], got {omega}")
    if small > big:
        raise ParameterError("interpolation direction violated: small > big")
    return small**omega * big ** (1.0 - omega)
