"""Exceptions raised by the path planner."""


class PathPlanError(Exception):
    """Base class for all path planner errors."""


class InputDomainError(PathPlanError, ValueError):
    """Non-finite or wrongly shaped input."""


class FactorizationError(PathPlanError, ArithmeticError):
    """Cholesky factorization failed (matrix not symmetric positive definite)."""


class SingularFactorError(PathPlanError, ArithmeticError):
    """Triangular solve against a factor with a zero diagonal entry."""


class DivergenceError(PathPlanError, ArithmeticError):
    """An iterate became non-finite. Usually the step sizes are too large."""

    def __init__(self, message: str, iteration: int = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)


class UndefinedDirectionError(PathPlanError, ValueError):
    """The optimal control direction is undefined for a zero costate."""


class ManifestError(PathPlanError, ValueError):
    """A run manifest could not be parsed."""

    def __init__(self, message: str, line: int = None, key: str = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ValidationError(PathPlanError, ValueError):
    """A manifest or problem failed validation."""

    def __init__(self, message: str, key: str = None):
        self.key = key
        super().__init__(message)
