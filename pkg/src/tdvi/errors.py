"""Exception hierarchy shared by every layer of the package."""


class VariationalError(Exception):
    """Base class for all errors raised by tdvi."""

    #: short machine-readable kind, used in trajectory failure records
    kind = "error"


class EvaluationError(VariationalError, ArithmeticError):
    kind = "EvaluationError"

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} at {point!r}")
        self.point = point


class DegenerateLagrangian(VariationalError):
    """The velocity Hessian of a Lagrangian is singular."""

    kind = "DegenerateLagrangian"


class NonMonotoneTime(VariationalError, ValueError):
    """Times are not strictly increasing, or a step left its admissible bounds."""

    kind = "NonMonotoneTime"


class ZeroTimeStep(NonMonotoneTime):
    kind = "ZeroTimeStep"


class NewtonDivergence(VariationalError):
    kind = "NewtonDivergence"


class SingularJacobian(VariationalError):
    """The Newton matrix of a step is rank deficient."""

    kind = "SingularJacobian"


class UnknownProblem(VariationalError, KeyError):
    kind = "UnknownProblem"

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown problem"


class ParseError(VariationalError, ValueError):
    kind = "ParseError"

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(VariationalError, ValueError):
    kind = "ValidationError"

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
