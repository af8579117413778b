class HardyConeError(Exception):
    """
    base class of every error raised by jax_hardycone
    """


class DomainError(HardyConeError, ValueError):
    """
    argument outside the domain where a formula or chart is defined
    """


class SingularPointError(DomainError):
    """
    evaluation requested at a singular point of a barrier or residual
    """


class SearchError(HardyConeError, RuntimeError):
    """
    eigenvalue bracket not found within the configured range
    """


class ConvergenceError(HardyConeError, RuntimeError):
    """
    iteration stopped at its cap before meeting its tolerance
    """


class CoercivityError(HardyConeError, RuntimeError):
    """
    discrete quadratic form is not positive definite
    """


class FitError(HardyConeError, RuntimeError):
    """
    least-squares growth fit below its quality gate
    """


class PreconditionError(HardyConeError, ValueError):
    """
    hypothesis of an operation does not hold for the given input
    """


class GridError(HardyConeError, ValueError):
    """
    grid or mass matrix unusable for the requested computation
    """


NONEXISTENCE_NOTE = (
    "c exceeds the Hardy constant mu; in this regime there is no non-negative "
    "non-trivial supersolution"
)


class ConfigError(HardyConeError, ValueError):
    """
    unreadable configuration file or unknown configuration key
    """
