"""Exception types shared across the package."""


class KronboundError(Exception):
    """Base class for all package errors."""


class BadParameter(KronboundError, ValueError):
    pass


class BadPrime(KronboundError, ArithmeticError):
    """The chosen prime divides a denominator; retry with another prime."""


class InconsistentSamples(KronboundError, ValueError):
    """A held-out sample disagrees with the interpolated polynomial."""


class DimensionMismatch(KronboundError, ValueError):
    pass


class ScalarDomainMismatch(KronboundError, TypeError):
    pass


class NotAKroneckerPower(KronboundError, ValueError):
    pass


class BadShape(KronboundError, ValueError):
    pass


class ShapeMismatch(KronboundError, ValueError):
    pass


class NotOneAGeneric(KronboundError, ArithmeticError):
    """No functional making the second tensor a full-rank matrix was found."""


class EmptyRange(KronboundError, ValueError):
    pass


class BelowThreshold(KronboundError, ValueError):
    pass


class NoMagnitudeGap(KronboundError, ValueError):
    pass


class DomainMismatch(KronboundError, TypeError):
    pass


class ReproductionMismatch(KronboundError, AssertionError):
    """A reproduced quantity differs from its expected value."""

    def __init__(self, message, diff=None):
        super().__init__(message)
        self.diff = diff or {}
