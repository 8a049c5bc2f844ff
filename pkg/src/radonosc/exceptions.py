"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation (t <= 0, p < 1, ...)."""


class CanonicalMapOverflowError(OverflowError):
    """A monomial of the canonical map does not fit in a signed 64-bit integer."""


class BudgetExceededError(RuntimeError):
    """An enumeration or allocation would exceed the configured budget."""


class InsufficientPaddingError(ValueError):
    """The periodic box of the FFT path is too small to hold the linear convolution."""


class ResolutionError(ValueError):
    """Grid spacing or box alignment does not resolve the requested dyadic cells."""


class BumpOverlapError(ValueError):
    """Supports of the projection bumps around distinct rationals intersect."""


class QuadratureError(RuntimeError):
    """Requested accuracy is not reachable at the given quadrature level."""


class SubsequenceError(ValueError):
    """A sequence is not a strictly increasing subsequence of the truncation grid."""
