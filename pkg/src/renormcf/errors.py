"""Exception hierarchy shared by every module."""


class RenormCFError(Exception):
    """Base class for all library errors."""


class DomainError(RenormCFError, ValueError):
    """An argument lies outside the domain of the operation."""


class BoundaryError(DomainError):
    """An argument sits exactly on a branch boundary (k = 2, omega = 1, ...)."""


class InsufficientPrecision(RenormCFError, ArithmeticError):
    """An enclosure is too wide to decide a comparison or a branch.

    Retrying at a higher working precision, or with a deeper expansion of
    the continued fraction, usually resolves it.
    """


class StreamExhausted(RenormCFError, IndexError):
    """A finite entry stream ended before the requested index."""


class NotRepresentable(RenormCFError, OverflowError):
    """An entry is too large even for the nested exponent form."""


class SpecParseError(RenormCFError, ValueError):
    """Malformed number specification text."""

    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} (at position {position})")
        self.text = text
        self.position = position
