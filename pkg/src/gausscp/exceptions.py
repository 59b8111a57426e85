"""Exception types raised by :mod:`gausscp`."""


class GaussCPError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidInputError(GaussCPError):
    """Input violates a documented precondition (shape, symmetry, range)."""


class DegenerateInputError(GaussCPError):
    """Input matrix is singular or not positive definite where invertibility is required."""


class NearPurityError(GaussCPError):
    """A symplectic eigenvalue is too close to 1 for a purity-gap dependent quantity.

    ``depth`` is set when the failure happened along a trajectory.
    """

    def __init__(self, message, depth=None, member=None):
        super().__init__(message)
        self.depth = depth
        self.member = member


class TruncationError(GaussCPError):
    """Fock cutoff too small to hold the state to the requested accuracy."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class FastPathError(GaussCPError):
    """A closed-form fast path was called on an input outside its structural class."""
