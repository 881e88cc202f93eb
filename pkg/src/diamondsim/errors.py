"""Exception types raised by diamondsim.

All of them derive from :class:`ValueError` so callers that only care about
"bad input" can catch one thing.
"""


class DiamondSimError(ValueError):
    pass


class InvalidDimensionError(DiamondSimError):
    pass


class HermiticityError(DiamondSimError):
    pass


class DimensionError(DiamondSimError):
    pass


class GridError(DiamondSimError):
    pass


class StateError(DiamondSimError):
    pass


class SpecError(DiamondSimError):
    pass


class IntervalError(DiamondSimError):
    pass


class IntegrityError(DiamondSimError):
    """Raised when an integration breaks trace or positivity bounds.

    ``diagnostics`` carries the offending time and the measured quantities.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RangeError(DiamondSimError):
    pass


class NormalizationError(DiamondSimError):
    pass


class QueryError(DiamondSimError):
    pass


class UnitarityError(DiamondSimError):
    pass


class ConfigError(DiamondSimError):
    """Invalid simulation config; ``field`` names the offending key path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
