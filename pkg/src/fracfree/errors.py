"""Exception types raised across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""

    code = "domain"


class SingularityError(ArithmeticError):
    """An S-transform was evaluated where the quantile vanishes."""

    code = "singularity"


class InvalidTransformError(ValueError):
    code = "invalid-transform"


class UnsupportedInputError(ValueError):
    """The input measure is valid but outside what the operation handles."""

    code = "unsupported"


class InsufficientDataError(ValueError):
    code = "insufficient-data"


class DegreeDropError(ValueError):
    code = "degree-drop"


class CflError(RuntimeError):
    """An explicit time step exceeded the stability limit."""

    code = "cfl"

    def __init__(self, message, courant=None):
        super().__init__(message)
        self.courant = courant


class ConvergenceError(RuntimeError):
    """Root iteration did not converge; ``roots``/``converged`` hold the partial result."""

    code = "non-convergence"

    def __init__(self, message, roots=None, converged=None):
        super().__init__(message)
        self.roots = roots
        self.converged = converged


class ConfigError(ValueError):
    """Required parameters are missing or inconsistent."""

    code = "config"
