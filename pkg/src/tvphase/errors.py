"""Exception hierarchy shared across the package.

Validation problems (bad shapes, counts outside their domain, unrealizable
variation patterns) derive from :class:`ValidationError`; the CLI maps them
to exit code 2.  Optimization backends that cannot certify a solution raise
:class:`SolverFailure`, mapped to exit code 3.
"""


class ValidationError(ValueError):
    """Input fails a documented precondition."""


class DimensionError(ValidationError):
    """Array shape or length incompatible with the operation."""


class ParameterError(ValidationError):
    """Scalar argument outside its documented domain."""


class PatternInfeasibleError(ValidationError):
    """No support/sign layout realizes the requested variation counts."""


class SolverFailure(RuntimeError):
    """An optimization backend failed or could not certify its answer."""
