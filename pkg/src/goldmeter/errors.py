"""Exception types shared across the package.

Plain argument mistakes (negative time steps, empty lists, identical
events) raise the builtin ``ValueError``; the classes below mark failures
of domain contracts that callers may want to catch separately.
"""


class GoldmeterError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(GoldmeterError):
    """Operands live in different or incompatible spaces."""


class ContractViolationError(GoldmeterError):
    """An input breaks a stated precondition (e.g. an unnormalized state)."""


class DegenerateProfileError(GoldmeterError):
    """An amplitude profile is identically zero on the grid."""


class StatisticsError(GoldmeterError):
    """A statistics routine received no usable samples."""


class ScenarioError(GoldmeterError):
    """A scenario file is missing, malformed, or fails validation."""
