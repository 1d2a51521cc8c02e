"""Exception types shared across the toolkit."""

from __future__ import annotations


class BeamlinkError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BeamlinkError, ValueError):
    """A parameter is outside its physical or mathematical domain."""


class GeometryError(BeamlinkError):
    """Degenerate link geometry (coincident poses, zero-length axis, ...)."""


class ConvergenceError(BeamlinkError):
    """An iterative scheme failed to reach the requested tolerance.

    Carries the best estimate obtained so far so callers can decide whether
    it is usable anyway.
    """

    def __init__(self, message: str, best_estimate: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate


class InfeasiblePowerError(BeamlinkError, ValueError):
    """Requested optical power is at or beyond the device saturation limit."""


class OutOfBandError(BeamlinkError, ValueError):
    """Frequency lies outside the validity band of the loaded data backend."""


class ConfigError(BeamlinkError, ValueError):
    """Scenario configuration is invalid.

    ``errors`` holds every validation failure found, not just the first.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
