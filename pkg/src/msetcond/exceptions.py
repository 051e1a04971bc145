"""Exception hierarchy. Everything derives from ValueError so callers that
only care about bad input can catch one thing."""


class MultisetError(ValueError):
    pass


class SequenceFormatError(MultisetError):
    """A sequence file could not be parsed."""


class NegativeCoefficientError(MultisetError):
    pass


class EmptySequenceError(MultisetError):
    """All coefficients are zero."""


class UnknownClassError(MultisetError):
    pass


class RhoEstimateError(MultisetError):
    """The ratio test did not produce a usable radius."""


class UncertifiedTailError(MultisetError):
    """A truncated sum could not be bounded to the requested tolerance."""

    def __init__(self, message, required_K=None):
        super().__init__(message)
        self.required_K = required_K


class IntegralityError(MultisetError, ArithmeticError):
    """An exact-mode coefficient came out non-integral (arithmetic bug)."""


class TruncationRangeError(MultisetError, IndexError):
    pass


class EmptyStratumError(MultisetError):
    """g_{n,N} = 0, so there is nothing to sample."""


class DomainError(MultisetError):
    """Operation needs integer coefficients but got a real sequence (or vice versa)."""
