"""Exception hierarchy for the solver.

Validation problems (bad input data, bad configuration) and numerical
failures (infeasible time step, lost diagonal dominance, non-finite state)
are kept in separate branches so callers can map them to exit codes.
"""


class DdfluxError(Exception):
    """Base class for every error raised by this package."""


class DdfluxValidationError(DdfluxError):
    """Base class for input/configuration problems."""


class ValidationError(DdfluxValidationError):
    """A declared invariant on user input does not hold."""


class InvalidInitialData(DdfluxValidationError):
    """Initial data is non-finite or cannot be projected onto the grid."""


class InvalidCoefficient(DdfluxValidationError):
    """Coefficient data violates its declared bounds or jump structure."""


class ParseError(DdfluxValidationError):
    """A config file line could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DdfluxNumericalError(DdfluxError):
    """Base class for runtime numerical failures."""


class FluxEvaluationError(DdfluxNumericalError):
    """A numerical flux quadrature failed to converge."""


class CFLInfeasible(DdfluxNumericalError):
    """No positive time step satisfies the requested CFL constraints."""


class DominanceViolation(DdfluxNumericalError):
    """A tridiagonal system lost the required diagonal dominance."""


class SingularSystem(DdfluxNumericalError):
    """A linear solve hit a zero pivot."""


class CoefficientDegeneracy(DdfluxNumericalError):
    """A state-dependent operator weight became negative or degenerate."""


class NonFiniteState(DdfluxNumericalError):
    """A field contains NaN or Inf entries."""
