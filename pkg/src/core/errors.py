"""
Exception hierarchy shared by every sparls module.
"""
from typing import Any, Dict, Optional


class SparlsError(Exception):
    """Base class for all errors raised by sparls."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class PenaltyDomainError(SparlsError, ValueError):
    """Raised when a penalty or proximal operator gets arguments outside its domain."""


class DimensionError(SparlsError, ValueError):
    """Raised when vector/matrix shapes or group layouts do not agree."""


class ConvergenceError(SparlsError, ArithmeticError):
    """Raised when an iterative numerical routine fails."""


class DiagnosticsError(SparlsError, ValueError):
    """Raised when an error-bound diagnostic is requested outside its validity range."""


class MetricsError(SparlsError, ValueError):
    """Raised when a performance metric is undefined for its inputs."""


class StreamError(SparlsError, ValueError):
    """Raised for invalid scenario configurations or malformed stream fixtures."""


class ConfigError(SparlsError, ValueError):
    """Raised for invalid experiment configurations."""


class PlotError(SparlsError):
    """Raised when a plot backend fails."""


class TrialError(SparlsError):
    """Raised when a Monte Carlo trial fails inside the worker pool."""
