"""Exception hierarchy shared by all riglab modules.

The CLI maps these onto exit codes, so every failure mode that a user can
trigger from the command line has its own class here.
"""


class RiglabError(Exception):
    """Base class for all library errors."""


class RangeInvalid(RiglabError, ValueError):
    """An integer range or size parameter violates its precondition."""


class SegmentTooLarge(RiglabError, MemoryError):
    """Requested sieve range exceeds the configured memory cap."""


class EpsilonOutOfRange(RiglabError, ValueError):
    pass


class PrecisionExhausted(RiglabError, ArithmeticError):
    """A certified comparison or digit could not be decided at the working precision."""


class RationalInput(RiglabError, ValueError):
    """An input that must be irrational turned out to be rational."""


class IndexOutOfRange(RiglabError, IndexError):
    pass


class InsufficientExpansion(RiglabError, ValueError):
    pass


class NoSuchK(RiglabError, ValueError):
    """No convergent denominator lies in the required window."""


class ModeResonance(RiglabError, ArithmeticError):
    pass


class PointOutsideSpace(RiglabError, ValueError):
    pass


class ObservableUnsupported(RiglabError, TypeError):
    pass


class BlocksInvalid(RiglabError, ValueError):
    pass


class ConfigError(RiglabError, ValueError):
    """Malformed configuration text; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ConfigError):
    pass
