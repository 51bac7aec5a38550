"""Exception types shared across the package."""


class QuasitopoError(Exception):
    """Base class for all package errors."""


class SiteIndexError(QuasitopoError, IndexError):
    """A 1-based site or bond index fell outside the lattice."""


class ParameterError(QuasitopoError, ValueError):
    """Model or run parameters violate their invariants."""


class ConvergenceError(QuasitopoError, ArithmeticError):
    """The eigensolver hit its iteration cap."""

    def __init__(self, index, iterations):
        self.index = index
        self.iterations = iterations
        super().__init__(
            f"QL iteration did not converge for eigenvalue index {index} "
            f"after {iterations} iterations"
        )


class UndefinedEstimateError(QuasitopoError, ZeroDivisionError):
    """A ratio estimator has a zero denominator."""


class ConfigError(QuasitopoError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
