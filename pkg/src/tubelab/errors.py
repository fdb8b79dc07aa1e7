"""Shared exception types.

Every error raised on purpose by this package derives from TubelabError,
so callers can catch one type at the CLI boundary and map it to an exit
code without guessing which submodule it came from.
"""


class TubelabError(Exception):
    """Base class for all package errors."""


class DegenerateCurveError(TubelabError):
    """Curve speed vanishes (or nearly vanishes) somewhere on the interval."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class TransportError(TubelabError):
    """Frame propagation lost orthonormality beyond the allowed drift."""


class ReachExceededError(TubelabError):
    """Requested tube radius collides with the center set's reach."""

    def __init__(self, message, epsilon=None, reach=None, witness=None):
        super().__init__(message)
        self.epsilon = epsilon
        self.reach = reach
        # witness: parameter value or parameter pair responsible for the bound
        self.witness = witness


class ProjectionError(TubelabError):
    """Nearest-point projection failed or left its domain of validity."""


class AmbiguousProjectionError(ProjectionError):
    """Two nearest-point candidates are indistinguishable: point beyond reach."""


class GrowthConditionError(TubelabError):
    """Nonlinearity violates the sign/growth condition it was asked to satisfy."""


class BracketNotFoundError(TubelabError):
    """Shooting scan found no sign change for the requested nodal class."""


class ConfigError(TubelabError):
    """Run configuration is malformed, incomplete, or contradictory."""
