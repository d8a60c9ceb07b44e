"""Exception hierarchy.

Errors that describe a defective model derive from :class:`InvalidModelError`,
failures of the numerical machinery from :class:`SolverError`. The CLI maps
the two families onto distinct exit codes.
"""


class COAError(Exception):
    """Base class for all errors raised by this package."""


class InvalidModelError(COAError, ValueError):
    """The continuous model violates a structural requirement."""


class AssemblyError(InvalidModelError):
    """A kernel or fitness sample was not finite during matrix assembly."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ReducibleOperatorError(InvalidModelError):
    """The discretized mutation matrix is not irreducible."""


class QuadratureError(COAError, ValueError):
    """An integrand was not finite at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class IncompatiblePartitionError(COAError, ValueError):
    pass


class DegenerateDensityError(COAError, ValueError):
    pass


class PoleError(COAError, ValueError):
    """Requested alpha lies at or below ``-min(w)``, where T + alpha is singular."""


class SolverError(COAError, RuntimeError):
    """Base class for numerical failures of the eigensolvers."""


class ConvergenceError(SolverError):
    def __init__(self, message, increment=None, iterations=None):
        super().__init__(message)
        self.increment = increment
        self.iterations = iterations


class BracketError(SolverError):
    pass


class StudyError(SolverError):
    """A refinement study aborted; ``partial`` holds the levels completed so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(COAError, ValueError):
    def __init__(self, message, line=None, column=None, key=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.key = key
