"""Exception hierarchy shared by all fracpath modules."""


class FracPathError(Exception):
    """Base class for every error raised by fracpath."""


class InvalidDomain(FracPathError, ValueError):
    pass


class InvalidMesh(FracPathError, ValueError):
    pass


class InvalidOrder(FracPathError, ValueError):
    pass


class InvalidParameter(FracPathError, ValueError):
    pass


class UnsupportedExponent(FracPathError, ValueError):
    pass


class DimensionMismatch(FracPathError, ValueError):
    pass


class WrongBC(FracPathError, ValueError):
    pass


class DomainError(FracPathError, ArithmeticError):
    """A state left the region where the model can be evaluated."""


class SingularMatrix(FracPathError, ArithmeticError):
    pass


class ConvergenceFailure(FracPathError, RuntimeError):
    pass


class DegenerateKernel(FracPathError, ArithmeticError):
    pass


class NoConvergence(FracPathError, RuntimeError):
    pass


class SingularJacobian(FracPathError, ArithmeticError):
    pass


class StartNotConverged(FracPathError, RuntimeError):
    pass


class StepCollapse(FracPathError, RuntimeError):
    pass


class AmbiguousEvent(FracPathError, RuntimeError):
    pass


class SwitchFailed(FracPathError, RuntimeError):
    pass


class ParseError(FracPathError, ValueError):
    pass


class ValidationError(FracPathError, ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class EmptyBranch(FracPathError, ValueError):
    pass


class TaskFailed(FracPathError, RuntimeError):
    """A run task failed; ``task`` names it and ``__cause__`` holds the reason."""

    def __init__(self, task: str, message: str):
        self.task = task
        super().__init__(f"task '{task}' failed: {message}")
