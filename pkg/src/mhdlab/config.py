"""Line-oriented run configuration: parsing, validation, provenance.

Format: one `key = value` per line, `#` starts a comment, blank lines are
skipped.  Unknown keys, duplicate keys, and out-of-range values are rejected
with line numbers before any computation starts.  The resolved config can be
re-emitted as canonical text for embedding into every output file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config"]

_CRITERIA = ("thm11", "thm12", "thm13")
_INITIAL_KINDS = ("orszag-tang", "random-divfree", "constant", "single-mode")


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_mode(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(p.strip()) for p in s.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {s!r}")


@dataclass
class RunConfig:
    # grid
    dim: int = 2
    n: int = 64
    length: float = 2.0 * math.pi
    # solver
    nu: float = 1.0
    mu: float = 1.0
    substeps: int = 16
    tol: float = 1e-10
    n_max: int = 60
    dealias: bool = True
    # constants
    constants: str = "explicit"  # or "calibrate"
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    calibration_samples: int = 3
    # criterion
    criterion: str = "thm11"
    delta: float = 0.5
    alpha: float | None = None  # None: use the admissible floor
    gamma: float = 0.5
    beta: float = 0.75
    # chain window
    horizon: float = 1.0
    epsilon: float | None = None  # None: half the horizon
    # scan resolution
    dir_count: int | None = None
    scale_count: int = 8
    samples: int = 256
    stride: int = 8
    candidates: int = 8
    # monte carlo
    walks: int = 100_000
    mc_step: float = 1e-4  # absorption layer as a fraction of the radius
    seed: int = 0
    # initial data
    initial: str = "random-divfree"
    amplitude: float = 0.5
    b_amplitude: float | None = None
    slope: float = 1.0
    constant_value: float = 1.0
    mode_k: tuple[int, ...] | None = None
    # output
    outdir: str = "out"

    @property
    def epsilon_resolved(self) -> float:
        return self.horizon / 2.0 if self.epsilon is None else self.epsilon

    def resolved_lines(self) -> list[str]:
        # outdir is placement, not experiment identity; leave it out so the
        # embedded provenance is identical across output locations
        out = []
        for f in fields(self):
            if f.name == "outdir":
                continue
            v = getattr(self, f.name)
            if v is None:
                v = "auto"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append(f"{f.name} = {v}")
        return out

    def resolved_text(self) -> str:
        return "\n".join(self.resolved_lines()) + "\n"


# key -> (parser, validator, constraint description); validators run on the
# parsed value and the "auto" sentinel maps to None before validation.
def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


_SCHEMA = {
    "dim": (int, lambda v: v in (2, 3), "must be 2 or 3"),
    "n": (int, lambda v: v >= 8 and (v & (v - 1)) == 0, "must be a power of two >= 8"),
    "length": (float, _pos, "must be positive"),
    "nu": (float, _pos, "must be positive"),
    "mu": (float, _pos, "must be positive"),
    "substeps": (int, lambda v: v >= 4, "must be >= 4"),
    "tol": (float, _pos, "must be positive"),
    "n_max": (int, lambda v: v >= 1, "must be >= 1"),
    "dealias": (_parse_bool, lambda v: True, ""),
    "constants": (str, lambda v: v in ("explicit", "calibrate"), "must be explicit or calibrate"),
    "c1": (float, lambda v: v >= 1.0, "must be >= 1"),
    "c2": (float, lambda v: v >= 1.0, "must be >= 1"),
    "c3": (float, lambda v: v >= 1.0, "must be >= 1"),
    "c4": (float, lambda v: v >= 1.0, "must be >= 1"),
    "calibration_samples": (int, lambda v: v >= 1, "must be >= 1"),
    "criterion": (str, lambda v: v in _CRITERIA, f"must be one of {', '.join(_CRITERIA)}"),
    "delta": (float, lambda v: 0.0 < v < 1.0, "must lie in the open interval (0, 1)"),
    "alpha": (float, _nonneg, "must be nonnegative"),
    "gamma": (float, lambda v: 0.0 < v < 1.0, "must lie in the open interval (0, 1)"),
    "beta": (float, lambda v: 0.5 < v < 1.0, "must lie in the open interval (1/2, 1)"),
    "horizon": (float, _pos, "must be positive"),
    "epsilon": (float, _pos, "must be positive"),
    "dir_count": (int, lambda v: v >= 1, "must be >= 1"),
    "scale_count": (int, lambda v: v >= 1, "must be >= 1"),
    "samples": (int, lambda v: v >= 64, "must be >= 64"),
    "stride": (int, lambda v: v >= 1, "must be >= 1"),
    "candidates": (int, lambda v: v >= 1, "must be >= 1"),
    "walks": (int, lambda v: v >= 10_000, "must be >= 10000"),
    "mc_step": (float, lambda v: 0.0 < v < 1.0, "must lie in (0, 1)"),
    "seed": (int, _nonneg, "must be nonnegative"),
    "initial": (str, lambda v: v in _INITIAL_KINDS, f"must be one of {', '.join(_INITIAL_KINDS)}"),
    "amplitude": (float, _nonneg, "must be nonnegative"),
    "b_amplitude": (float, _nonneg, "must be nonnegative"),
    "slope": (float, _nonneg, "must be nonnegative"),
    "constant_value": (float, lambda v: True, ""),
    "mode_k": (_parse_mode, lambda v: any(v), "must contain a nonzero component"),
    "outdir": (str, lambda v: len(v) > 0, "must be nonempty"),
}

_OPTIONAL_AUTO = {"alpha", "dir_count", "b_amplitude", "mode_k", "epsilon"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; raises ConfigError with line numbers."""
    seen: dict[str, int] = {}
    cfg = RunConfig()
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ConfigError(
                f"duplicate key {key!r} (first set on line {seen[key]})", line=lineno
            )
        seen[key] = lineno
        lines[key] = lineno
        parser, validator, constraint = _SCHEMA[key]
        if key in _OPTIONAL_AUTO and value.lower() == "auto":
            setattr(cfg, key, None)
            continue
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno) from None
        if not validator(parsed):
            raise ConfigError(f"{key} {constraint}, got {value}", line=lineno)
        setattr(cfg, key, parsed)

    # cross-field checks, attributed to the most relevant line when present
    if cfg.n % cfg.stride != 0:
        raise ConfigError(
            f"stride {cfg.stride} must divide n = {cfg.n}", line=lines.get("stride")
        )
    if cfg.epsilon is not None and cfg.epsilon >= cfg.horizon:
        raise ConfigError(
            f"epsilon {cfg.epsilon} must be smaller than horizon {cfg.horizon}",
            line=lines.get("epsilon"),
        )
    if cfg.initial == "single-mode" and cfg.mode_k is None:
        raise ConfigError(
            "missing required key mode_k (required by initial = single-mode)",
            line=lines.get("initial"),
        )
    if cfg.initial == "single-mode" and len(cfg.mode_k) != cfg.dim:
        raise ConfigError(
            f"mode_k needs {cfg.dim} components, got {len(cfg.mode_k)}",
            line=lines.get("mode_k"),
        )
    if cfg.initial == "orszag-tang" and cfg.dim != 2:
        raise ConfigError(
            "initial = orszag-tang requires dim = 2", line=lines.get("initial")
        )
    return cfg
