"""Exception types raised across the package."""


class RdsLabError(Exception):
    """Base class for all package errors."""


class GraphFormatError(RdsLabError, ValueError):
    """Malformed edge-list or trait input."""


class UndefinedMetricError(RdsLabError, ValueError):
    """A structural metric is undefined for the given graph (e.g. zero variance)."""


class GenerationError(RdsLabError, RuntimeError):
    """Network generation failed (restart budget exhausted)."""


class InfeasibleTargetError(GenerationError):
    """A generator target cannot be reached for this graph."""


class EstimatorError(RdsLabError, ValueError):
    """An estimator is not applicable to the given sample."""


class SampleFormatError(RdsLabError, ValueError):
    """Malformed or inconsistent RDS sample file."""
