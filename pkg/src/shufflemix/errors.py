"""Exception types shared across the package.

Plain ValueError covers domain errors (bad parameters, size mismatches);
these two mark conditions the CLI maps to dedicated exit codes.
"""


class CapacityError(Exception):
    """A request exceeds a hard size cap (dense n! work, eigendecomposition)."""


class NumericError(Exception):
    """A numeric procedure failed to converge or hit a singular regime."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnreachableTargetError(Exception):
    """A generator set does not reach part of a target measure's support."""
