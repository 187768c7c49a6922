"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`AlphatailError`, so
callers (and the CLI) can distinguish our failures from genuine bugs.
"""


class AlphatailError(Exception):
    """Base class for all library errors."""


class InvalidParams(AlphatailError, ValueError):
    """A family parameter violates its stated constraint."""


class NormalizationDivergent(InvalidParams):
    """The family's total mass diverges (e.g. a power tail with exponent <= 1)."""


class DepthExceeded(AlphatailError):
    """A constructed family was queried beyond its generation depth."""


class StagesExceeded(InvalidParams):
    """Diffusion construction asked for more stages than the configured maximum."""


class InvalidBase(InvalidParams):
    """A constructed family needs a strictly decreasing, infinite base."""


class NoTailBound(AlphatailError):
    """The distribution cannot certify a bound on its tail mass."""


class FiniteSupport(AlphatailError):
    """Operation requires an infinite-support distribution."""


class ScheduleTooShort(InvalidParams):
    """A sample-size schedule does not span enough points or decades."""


class InvalidV(InvalidParams):
    """Estimator order v outside the admissible range [1, n-1]."""


class TooLarge(InvalidParams):
    """Exact enumeration was requested beyond the supported instance size."""


class SpecParseError(InvalidParams):
    """A textual family spec could not be parsed."""
