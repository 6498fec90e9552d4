"""Exception types raised across the package."""


class NadsLabError(Exception):
    """Base class for all nads-lab errors."""


class DomainError(NadsLabError):
    """A state value lies outside the interval the maps are defined on."""


class SmoothnessError(NadsLabError):
    """An operation needs a derivative the map sequence does not provide."""


class ConfigError(NadsLabError):
    """Invalid option values or an unusable probe/grid configuration."""


class ParamRangeError(NadsLabError):
    """A parameter schedule leaves the range admitted by the map family."""


class SelfMapError(NadsLabError):
    """A map in the sequence sends points of the domain outside of it."""


class HypothesisError(NadsLabError):
    """A certificate hypothesis (exponent sign/gap, nonzero derivative) fails."""


class PreconditionError(NadsLabError):
    """Inputs do not satisfy a documented precondition of the operation."""


class NegativeInputError(NadsLabError):
    """A quantity that must be nonnegative is negative."""


class EmptyInputError(NadsLabError):
    """A nonempty sequence was required."""


class RangeError(NadsLabError):
    """Composition attempted without the required range-coverage guarantee."""


class ParseError(NadsLabError):
    """A system specification file or CLI option could not be parsed."""
