"""Exception hierarchy shared across the package.

Everything raised deliberately by this package derives from MidexError so
callers can catch one type at the boundary.  Validation errors carry enough
context in their message to locate the offending entry without a debugger.
"""


class MidexError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(MidexError):
    """Matrix or vector shape is not what the operation requires."""


class DiagonalError(MidexError):
    """A preference matrix diagonal entry differs from one half."""


class SkewError(MidexError):
    """P(i, j) + P(j, i) deviates from 1 beyond tolerance."""


class EntryRangeError(MidexError):
    """A probability entry lies outside [0, 1]."""


class EmptySequenceError(MidexError):
    """A preference sequence with no rounds was supplied."""


class ArmOutOfRangeError(MidexError):
    """An arm index is outside the valid range for the instance."""


class SubsetSizeError(MidexError):
    """A played-subset size is below 2 or above the number of arms."""


class WinnerIndexError(MidexError):
    """Environment feedback named a position outside the played subset."""


class InfeasibleParamsError(MidexError):
    """No valid learner parameters exist for the requested instance."""


class FloorViolationError(MidexError):
    """A sampling probability fell below the exploration floor."""


class AdversarySpecError(MidexError):
    """An adversary description is internally inconsistent."""


class ConfigError(MidexError):
    """Base class for run-configuration problems."""


class ConfigParseError(ConfigError):
    """The configuration text could not be parsed at all."""


class ConfigValidationError(ConfigError):
    """The configuration parsed but contains invalid or unknown fields."""
