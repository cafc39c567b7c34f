"""Exception types shared across the package."""


class HorolabError(Exception):
    """Base class for all package-specific failures."""


class AmbiguousBoundary(HorolabError):
    """A point sits within tolerance of a ping-pong disk boundary.

    The reduction/coding step cannot decide which side the point is on.
    Callers should retry with a perturbed input.
    """


class NonTerminating(HorolabError):
    """Domain reduction exceeded its step budget (invalid Schottky data)."""


class InsufficientDepth(HorolabError):
    """Word-length cutoff too small for the requested estimate."""


class EmptySupport(HorolabError):
    """A horocycle ball carries no mass at the current cutoff."""


class LeakyBox(HorolabError):
    """Too much in-box mass could not be assigned to any plaque."""


class ZeroDenominator(HorolabError):
    """Denominator integral of a ratio average is numerically zero."""


class ConfigError(HorolabError):
    """Experiment configuration failed validation."""
