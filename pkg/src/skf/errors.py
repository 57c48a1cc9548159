"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes (see ``skf.cli``): invalid
arguments or config -> 2, infeasible dimensions -> 3, solver failure -> 4.
"""


class SkfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SkfError, ValueError):
    """An argument violates a documented precondition."""


class NotPSDError(InvalidArgumentError):
    """A matrix required to be positive semidefinite is not, beyond tolerance."""


class InvalidSeparationError(InvalidArgumentError):
    """A separation vector s violates the knockoff feasibility constraints."""


class RankDeficiencyError(InvalidArgumentError):
    """A matrix does not have the rank required by the operation."""


class InfeasibleDimensionError(SkfError, ValueError):
    """Problem dimensions rule out the requested construction (e.g. n < m + p)."""


class ConvergenceError(SkfError, RuntimeError):
    """The path solver failed to reach its certified tolerance.

    Carries the worst KKT residual seen so callers can report it.
    """

    def __init__(self, message: str, worst_residual: float):
        super().__init__(message)
        self.worst_residual = worst_residual
