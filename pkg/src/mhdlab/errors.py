"""Exception types shared across the package."""


class MhdLabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(MhdLabError, ValueError):
    """An argument violates a documented precondition."""


class GridMismatchError(MhdLabError, ValueError):
    """Fields that must share a grid do not."""


class ScaleError(ParameterError):
    """A segment scale exceeds what the periodic box supports."""


class HorizonError(MhdLabError, ValueError):
    """A requested time lies outside the valid existence window."""


class PicardDivergedError(MhdLabError, RuntimeError):
    """Picard continuation could not converge within the level cap."""


class CalibrationError(MhdLabError, RuntimeError):
    """Constant calibration failed; carries the offending sample index."""

    def __init__(self, message: str, sample_index: int | None = None):
        super().__init__(message)
        self.sample_index = sample_index


class ConfigError(MhdLabError, ValueError):
    """Config text is malformed; carries the offending line number(s)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SnapshotError(MhdLabError, ValueError):
    """Snapshot payload is malformed, truncated, or of unknown version."""
