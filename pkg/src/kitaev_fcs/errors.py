"""Exception types raised by the counting-statistics engine."""

__all__ = [
    "FcsError",
    "SingularPropagator",
    "TailNotConverged",
    "BranchAmbiguity",
    "StepTooSmall",
    "CaseMismatch",
    "InsufficientSupport",
    "ParityError",
]


class FcsError(Exception):
    """Base class for all errors of this package."""


class SingularPropagator(FcsError):
    """The chain propagator ``(omega - K)^-1`` does not exist at the requested frequency."""


class TailNotConverged(FcsError):
    """The frequency window is too narrow: ``|ln Z|`` at the window edge exceeds the tolerance."""


class BranchAmbiguity(FcsError):
    """The complex logarithm could not be continued unambiguously along the counting-field path."""


class StepTooSmall(FcsError):
    """Richardson extrapolation of a finite-difference derivative did not converge."""


class CaseMismatch(FcsError):
    """Parameters violate the validity constraints of a closed-form case."""


class InsufficientSupport(FcsError):
    """Too few resolved ``(q, -q)`` pairs to fit a fluctuation-theorem slope."""


class ParityError(FcsError):
    """Lead charges with odd total cannot be split into normal and crossed-Andreev parts."""
