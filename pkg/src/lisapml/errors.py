"""Exception hierarchy shared across the package."""

from __future__ import annotations


class LisaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LisaError, ValueError):
    """Inconsistent grid, layer, or run parameters."""


class ConfigValidationError(ConfigurationError):
    """A configuration document failed validation.

    Attributes:
        violations: every problem found, one human-readable string each.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


class MaterialError(LisaError, ValueError):
    """Non-physical material values (non-positive density or modulus)."""


class DivergenceError(LisaError, RuntimeError):
    """A time step produced non-finite values."""

    def __init__(self, step_index: int, message: str | None = None):
        self.step_index = step_index
        super().__init__(message or f"non-finite displacement produced at step {step_index}")


class UndefinedRelativeError(LisaError, ZeroDivisionError):
    """Relative error requested against a reference with zero norm."""


class SnapshotFormatError(LisaError, ValueError):
    """Snapshot file has a malformed header or inconsistent payload."""


class SnapshotTruncatedError(SnapshotFormatError):
    """Snapshot payload is shorter than the header declares."""
