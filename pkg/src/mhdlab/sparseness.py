"""Super-level sets and the linear sparseness scan.

A set is linearly delta-sparse around x0 at scale r if some segment
(x0 - r d, x0 + r d) meets it in 1D measure at most 2 r delta.  Membership
along segments is decided by multilinear interpolation of the field
magnitude against the threshold, which approximates that measure better
than voxel lookups.  The existential direction/scale quantifiers become
finite searches whose resolution is recorded in every report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .directions import fibonacci_directions
from .errors import ParameterError, ScaleError
from .spectral import Grid, SpectralField

__all__ = [
    "SuperLevelSet",
    "SparsenessReport",
    "ScanSummary",
    "super_level_set",
    "intersection_level_set",
    "segment_occupancy",
    "is_sparse_at",
    "global_sparseness_scan",
]

DEFAULT_DIRECTIONS = {2: 32, 3: 64}
DEFAULT_SCALES = 8
DEFAULT_SAMPLES = 256
_SCALE_RATIO = 2.0


@dataclass(frozen=True)
class SuperLevelSet:
    """Grid points where a magnitude exceeds a threshold, at one time."""

    grid: Grid
    magnitude: np.ndarray  # |F| sampled on the grid
    threshold: float
    time: float
    indicator: np.ndarray  # magnitude > threshold

    @property
    def occupied_fraction(self) -> float:
        return float(self.indicator.mean())


def super_level_set(field: SpectralField, threshold: float, time: float = 0.0) -> SuperLevelSet:
    """Points where the Euclidean magnitude of the field exceeds threshold."""
    if threshold < 0:
        raise ParameterError(f"threshold must be nonnegative, got {threshold}")
    mag = field.magnitude()
    return SuperLevelSet(
        grid=field.grid,
        magnitude=mag,
        threshold=threshold,
        time=time,
        indicator=mag > threshold,
    )


def intersection_level_set(
    u: SpectralField, b: SpectralField, threshold: float, time: float = 0.0
) -> SuperLevelSet:
    """Points where both field magnitudes exceed the threshold.

    Realized as the super-level set of the pointwise minimum magnitude.
    """
    if threshold < 0:
        raise ParameterError(f"threshold must be nonnegative, got {threshold}")
    if u.grid != b.grid:
        raise ParameterError("fields must share a grid")
    mag = np.minimum(u.magnitude(), b.magnitude())
    return SuperLevelSet(
        grid=u.grid,
        magnitude=mag,
        threshold=threshold,
        time=time,
        indicator=mag > threshold,
    )


def periodic_interpolate(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of grid values at physical points (P, D)."""
    pts = np.asarray(points, dtype=np.float64)
    scaled = pts / grid.spacing
    base = np.floor(scaled).astype(np.int64)
    frac = scaled - base
    out = np.zeros(pts.shape[0])
    dim = grid.dim
    for corner in range(1 << dim):
        weight = np.ones(pts.shape[0])
        idx = []
        for ax in range(dim):
            bit = (corner >> ax) & 1
            idx.append((base[:, ax] + bit) % grid.n)
            weight *= frac[:, ax] if bit else (1.0 - frac[:, ax])
        out += weight * values[tuple(idx)]
    return out


@dataclass(frozen=True)
class SparsenessReport:
    """Verdict of a direction/scale search around one query point."""

    point: tuple[float, ...]
    delta: float
    sparse: bool
    direction: tuple[float, ...]  # witness when sparse, best found otherwise
    scale: float
    ratio: float  # occupancy at the witness, or the minimum seen
    dir_count: int
    scale_count: int
    samples: int
    scale_cap: float


@dataclass(frozen=True)
class ScanSummary:
    points: int
    failures: int
    worst_ratio: float

    @property
    def all_sparse(self) -> bool:
        return self.failures == 0


def segment_occupancy(
    level_set: SuperLevelSet,
    x0,
    direction,
    scale: float,
    samples: int = DEFAULT_SAMPLES,
) -> float:
    """Occupied fraction of the open segment (x0 - r d, x0 + r d).

    `samples` midpoints of equal subsegments are tested against the
    threshold via interpolated magnitude, with periodic wrap.
    """
    grid = level_set.grid
    x0 = np.asarray(x0, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    if x0.shape != (grid.dim,) or d.shape != (grid.dim,):
        raise ParameterError("point and direction must match the grid dimension")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ParameterError("direction must be a unit vector")
    if samples < 64:
        raise ParameterError(f"samples must be >= 64, got {samples}")
    if not scale > 0:
        raise ParameterError(f"scale must be positive, got {scale}")
    if scale > grid.length / 2.0:
        raise ScaleError(
            f"scale {scale} exceeds half the box period {grid.length / 2.0}; "
            "the segment would overlap itself"
        )
    offsets = -scale + (2.0 * scale) * (np.arange(samples) + 0.5) / samples
    points = x0[None, :] + offsets[:, None] * d[None, :]
    vals = periodic_interpolate(level_set.magnitude, grid, points)
    return float(np.count_nonzero(vals > level_set.threshold)) / samples


def _scale_ladder(scale_cap: float, scale_count: int) -> np.ndarray:
    # witnesses sit strictly below the cap
    return scale_cap * (1.0 - 1e-12) / _SCALE_RATIO ** np.arange(scale_count)


def is_sparse_at(
    level_set: SuperLevelSet,
    x0,
    delta: float,
    scale_cap: float,
    dir_count: int | None = None,
    scale_count: int = DEFAULT_SCALES,
    samples: int = DEFAULT_SAMPLES,
) -> SparsenessReport:
    """Search directions and scales for a witness of linear sparseness.

    Directions are antipodally-deduplicated quasi-uniform sets (equispaced
    angles in 2D, Fibonacci hemisphere in 3D); scales descend geometrically
    from the cap.  The first (d, r) with occupancy <= delta wins; otherwise
    the report carries the minimizing ratio found.
    """
    grid = level_set.grid
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not scale_cap > 0:
        raise ParameterError(f"scale cap must be positive, got {scale_cap}")
    if dir_count is None:
        dir_count = DEFAULT_DIRECTIONS[grid.dim]
    # segments longer than half the period are ill-defined on the torus
    effective_cap = min(scale_cap, grid.length / 2.0 * (1.0 - 1e-9))
    scales = _scale_ladder(effective_cap, scale_count)
    dirs = fibonacci_directions(grid.dim, dir_count)
    x0 = np.asarray(x0, dtype=np.float64)

    best_ratio = np.inf
    best_dir = dirs[0]
    best_scale = float(scales[0])
    meta = dict(
        dir_count=dir_count, scale_count=scale_count, samples=samples, scale_cap=effective_cap
    )
    offsets_unit = -1.0 + 2.0 * (np.arange(samples) + 0.5) / samples
    for d in dirs:
        # evaluate all scales for this direction in one interpolation pass
        offs = offsets_unit[None, :] * scales[:, None]  # (scale_count, samples)
        pts = x0[None, None, :] + offs[..., None] * d[None, None, :]
        vals = periodic_interpolate(
            level_set.magnitude, grid, pts.reshape(-1, grid.dim)
        ).reshape(scale_count, samples)
        ratios = (vals > level_set.threshold).mean(axis=1)
        for si, ratio in enumerate(ratios):
            if ratio < best_ratio:
                best_ratio = float(ratio)
                best_dir = d
                best_scale = float(scales[si])
            if ratio <= delta:
                return SparsenessReport(
                    point=tuple(x0),
                    delta=delta,
                    sparse=True,
                    direction=tuple(float(v) for v in d),
                    scale=float(scales[si]),
                    ratio=float(ratio),
                    **meta,
                )
    return SparsenessReport(
        point=tuple(x0),
        delta=delta,
        sparse=False,
        direction=tuple(float(v) for v in best_dir),
        scale=best_scale,
        ratio=best_ratio,
        **meta,
    )


def global_sparseness_scan(
    level_set: SuperLevelSet,
    delta: float,
    scale_cap: float,
    stride: int,
    dir_count: int | None = None,
    scale_count: int = DEFAULT_SCALES,
    samples: int = DEFAULT_SAMPLES,
) -> tuple[list[SparsenessReport], ScanSummary]:
    """Run the sparseness search at every stride-th grid point."""
    grid = level_set.grid
    if stride < 1 or grid.n % stride != 0:
        raise ParameterError(f"stride must divide n = {grid.n}, got {stride}")
    axes = [np.arange(0, grid.n, stride)] * grid.dim
    reports = []
    failures = 0
    worst = 0.0
    for idx in np.ndindex(*(len(a) for a in axes)):
        point = tuple(float(axes[ax][i] * grid.spacing) for ax, i in enumerate(idx))
        rep = is_sparse_at(
            level_set,
            point,
            delta,
            scale_cap,
            dir_count=dir_count,
            scale_count=scale_count,
            samples=samples,
        )
        reports.append(rep)
        if not rep.sparse:
            failures += 1
        worst = max(worst, rep.ratio)
    return reports, ScanSummary(points=len(reports), failures=failures, worst_ratio=worst)
