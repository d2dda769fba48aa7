"""Exception types shared across the package."""

from __future__ import annotations


class NumericalInvariantError(Exception):
    """A computed quantity violated a physicality or consistency bound."""


class UnphysicalBlochError(NumericalInvariantError):
    """A measured Bloch vector lies outside the unit ball beyond tolerance."""


class UnsupportedGateError(ValueError):
    """The gate cannot be realized as an rf-pulse / J-coupling schedule."""


class FitConvergenceError(NumericalInvariantError):
    """Decay curve fit did not converge; carries the best parameters found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(ValueError):
    """User-supplied configuration is malformed or inconsistent."""
