"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CvlinkError(Exception):
    """Base class for all library errors."""


class DomainError(CvlinkError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NumericalError(CvlinkError, ArithmeticError):
    """A numerical routine failed to converge.

    Attributes
    ----------
    estimate : float or None
        Best estimate available when the routine gave up.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class RegimeError(CvlinkError):
    """A physical approximation was pushed outside its validity range."""


class ConfigError(CvlinkError, ValueError):
    """A scenario configuration is malformed."""
