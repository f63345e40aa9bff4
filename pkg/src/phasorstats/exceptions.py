"""Typed exceptions for statistical preconditions and input validation."""


class PhasorStatsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PhasorStatsError, ValueError):
    """Argument outside the mathematical domain of a function."""


class TooFewObservations(PhasorStatsError, ValueError):
    """Sample size below the minimum required by an operation."""


class TooFewGroups(PhasorStatsError, ValueError):
    """Fewer groups than the design requires."""


class DegenerateCovariance(PhasorStatsError, ValueError):
    """Sample covariance is (numerically) rank deficient."""


class ZeroResidualVariance(PhasorStatsError, ValueError):
    """All observations coincide; residual power is zero."""


class SingularWithinScatter(PhasorStatsError, ValueError):
    """Within-group scatter matrix is singular."""


class LabelMismatch(PhasorStatsError, ValueError):
    """Unit labels cannot be aligned across samples."""


class EmptyUnit(PhasorStatsError, ValueError):
    """A unit contributed no observations."""


class DesignMismatch(PhasorStatsError, ValueError):
    """Datasets do not share the design required by an operation."""


class InvalidGraph(PhasorStatsError, ValueError):
    """Adjacency graph is malformed."""


class InvalidSpec(PhasorStatsError, ValueError):
    """Simulation specification violates its parameter constraints."""


class NonIntegerCycles(PhasorStatsError, ValueError):
    """Time series does not span a whole number of stimulation cycles."""


class FrequencyNotResolvable(PhasorStatsError, ValueError):
    """Target frequency is not a resolvable DFT bin of the series."""


class MalformedInput(PhasorStatsError, ValueError):
    """Input file cannot be parsed; message carries the offending line."""
