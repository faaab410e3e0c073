"""Shared exception types.

The CLI maps ContractError subclasses to exit code 1 and OS-level I/O
failures to exit code 2.
"""


class HardSampleError(Exception):
    """Base class for all library errors."""


class ContractError(HardSampleError):
    """A precondition or data contract was violated."""


class ConvergenceError(HardSampleError):
    """An iterative solver failed to converge within its budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InfeasibleRateError(ContractError):
    """The target mean rate cannot be reached for any scaling factor."""

    def __init__(self, message, feasible_low=None, feasible_high=None):
        super().__init__(message)
        self.feasible_low = feasible_low
        self.feasible_high = feasible_high


class DivergenceError(HardSampleError):
    """Training produced non-finite loss; try a smaller learning rate."""
