"""
Exception types raised by the library, each mapped to a CLI exit code.
"""


class RmGaussError(Exception):
    """Base class for library errors."""

    exit_code: int = 1


class DomainError(RmGaussError, ValueError):
    """An argument is outside the domain of an operation (negative variance, bad grid size, ...)."""


class GridMismatchError(RmGaussError, ValueError):
    pass


class ModeError(RmGaussError, ValueError):
    """Scalar/path mode of a state, sampler or problem does not match."""


class SingularJacobianError(RmGaussError, ArithmeticError):
    def __init__(self, node: int):
        super().__init__(f"zero pivot in tridiagonal elimination at node {node}")
        self.node = node


class TruncationStormError(RmGaussError, RuntimeError):
    exit_code = 3

    def __init__(self, sigma: int, n: int, cap: int):
        super().__init__(
            f"truncation storm: sigma={sigma} exceeded cap {cap} at iteration {n}; "
            "check the trust region and step schedule"
        )
        self.sigma = sigma
        self.n = n
        self.cap = cap


class ConfigError(RmGaussError, ValueError):
    exit_code = 2

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.details = details or []


class OracleNotConvergedError(RmGaussError, RuntimeError):
    exit_code = 4


class IncompatibleRunsError(RmGaussError, ValueError):
    def __init__(self, field: str, left, right):
        super().__init__(f"runs are incompatible: '{field}' differs ({left!r} vs {right!r})")
        self.field = field
