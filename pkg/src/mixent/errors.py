"""Exception types shared across the package."""


class MixentError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(MixentError, ValueError):
    """Operands live in different Hilbert-space dimensions."""


class InvalidStateError(MixentError, ValueError):
    """A matrix violates the invariants of its operator type."""


class InfiniteRelativeEntropyError(MixentError, ValueError):
    """Support of sigma is not contained in the support of rho.

    Raised explicitly so a divergent relative entropy never surfaces as a
    silently large float.
    """


class CapExceededError(MixentError, RuntimeError):
    """A dense-dimension or enumeration budget would be exceeded."""
