"""
Error types for WsRHS Energy Efficiency.

This module defines the exception hierarchy raised by the numerical kernel,
the channel and power models, the solvers and the experiment harness.
"""

from typing import Optional


class WsrhsError(Exception):
    """Base class for all package errors."""


class DimensionError(WsrhsError):
    """Matrix or vector dimensions are inconsistent."""


class ShapeError(WsrhsError):
    """Input has the right dimensions but the wrong structure."""


class NotPSDError(WsrhsError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class NotPositiveDefiniteError(WsrhsError):
    """Cholesky factorization failed."""


class ConditioningError(WsrhsError):
    """A matrix is too ill-conditioned for the requested inverse."""

    def __init__(self, message: str, ratio: Optional[float] = None):
        super().__init__(message)
        self.ratio = ratio


class GeometryError(WsrhsError):
    """Invalid array geometry (coincident or overlapping elements)."""


class DomainError(WsrhsError):
    """Argument outside the domain of a physical model."""


class ModelError(WsrhsError):
    """Power model cannot produce a finite objective."""


class DegenerateChannelError(WsrhsError):
    """Channel carries no power (zero effective gain)."""


class InfeasibleError(WsrhsError):
    """No strictly feasible point could be found."""


class SolverTimeoutError(WsrhsError):
    """A solve exceeded its wall-clock budget."""


class ExperimentError(WsrhsError):
    """Experiment run or output emission failed."""
