"""Exception types shared across the package.

Two families matter for callers: `InputError` (bad data or configuration,
CLI exit code 2) and `NumericalError` (a linear-algebra or iteration failure,
CLI exit code 3).
"""


class SteinCVError(Exception):
    """Base class for all package-specific errors."""


class InputError(SteinCVError, ValueError):
    """Invalid user input: malformed files, bad configuration, degenerate data."""


class NumericalError(SteinCVError, RuntimeError):
    """A numerical procedure failed (factorization, iteration, divergence)."""


class ConditioningError(NumericalError):
    """A matrix could not be factorized even after jitter escalation."""


class UnisolvencyError(NumericalError):
    """The polynomial constraint matrix is rank deficient for this point set."""


class TuningError(NumericalError):
    """Hyperparameter selection failed for every candidate value."""
