"""Exception types raised by the solver.

The CLI maps these onto exit codes (see :mod:`nlscatter.cli`).
"""


class NLScatterError(Exception):
    """Base class for all solver errors."""


class DomainError(NLScatterError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class AccuracyError(NLScatterError):
    """Requested evaluation lies outside the validated accuracy range."""


class RegimeError(NLScatterError):
    """Asymptotic formula requested outside its useful regime."""


class PreconditionError(NLScatterError):
    """A documented precondition of an operation does not hold."""


class NormalizationError(NLScatterError):
    """Incoming matching coefficient too small to normalize a mode."""


class ResonanceError(NLScatterError):
    """Wronskian of the radial solutions numerically vanishes."""


class FitError(NLScatterError):
    """Far-field least-squares fit is ill-conditioned."""


class StepSizeError(NLScatterError):
    """ODE integrator failed to advance."""


class NonConvergenceError(NLScatterError):
    """Fixed-point iteration hit its iteration cap without converging."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DivergenceError(NonConvergenceError):
    """Fixed-point update norms grew on consecutive iterations."""

    def __init__(self, message, norm, result=None):
        super().__init__(message, result)
        self.norm = norm
