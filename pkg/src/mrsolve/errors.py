"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by mrsolve."""


class ParameterError(SolverError, ValueError):
    """Invalid physical or numerical parameters."""


class DomainError(SolverError, ValueError):
    """Evaluation point outside the domain of a function."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NoRootsError(SolverError):
    """A nonzero constant polynomial was handed to a root finder."""


class NotExactlySolvable(SolverError):
    """The termination determinant keeps an s-dependent root condition."""


class UnsupportedPoleStructure(SolverError):
    """The generator ratio is not the logarithmic derivative of a polynomial."""


class BracketError(SolverError):
    """No sign change inside the requested bracket."""


class ConvergenceError(SolverError):
    """An iteration did not settle within its budget."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class NoRealAnsatz(SolverError):
    """The ansatz exponent gamma is complex at the requested energy."""


class NotBoundState(SolverError):
    """The requested energy or level is not a bound state."""


class NoBoundState(NotBoundState):
    """No bound state exists for the requested level."""


class UnphysicalLevel(NotBoundState):
    """The quantized exponent violates a boundary condition."""


class NotNormalizable(SolverError):
    """The eigenfunction envelope is not square integrable."""
