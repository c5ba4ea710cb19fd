"""Exception hierarchy shared by the synthesis pipeline and the CLI."""


class RegretCtlError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class DimensionError(RegretCtlError, ValueError):
    """Matrix shapes are mutually inconsistent."""

    exit_code = 1


class WeightError(RegretCtlError, ValueError):
    """A cost weight is not symmetric positive definite."""

    exit_code = 1

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class AssumptionError(RegretCtlError):
    """The plant violates the standing detectability/stabilizability assumptions."""

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(RegretCtlError):
    """An iteration failed to converge or a residual check failed."""

    exit_code = 3


class SingularityError(NumericalError):
    """A transfer matrix was evaluated at (or next to) one of its poles."""


class InfeasibleError(NumericalError):
    """No stabilizing solution exists at the requested level.

    ``value`` carries the diagnostic that decided infeasibility: the pencil
    eigenvalue closest to the unit circle, the offending eigenvalue of an
    R-factor, or a Hankel norm above one.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class InstabilityError(NumericalError):
    """A realization or closed loop that must be stable is not."""


class DivergenceError(NumericalError):
    """A time-domain simulation blew up."""


class BudgetError(RegretCtlError):
    """A dense computation would exceed the configured size budget."""

    exit_code = 4
