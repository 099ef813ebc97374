"""Exception types shared across the package."""


class FracjumpError(Exception):
    """Base class for all package errors."""


class DomainError(FracjumpError, ValueError):
    """A parameter lies outside its mathematical domain."""


class ContractError(FracjumpError, ValueError):
    """An array argument violates a length/shape precondition."""


class ConfigError(FracjumpError, ValueError):
    """An invalid configuration value or combination."""


class SimulationError(FracjumpError, RuntimeError):
    """Path synthesis failed (e.g. covariance factorization broke down)."""


class EstimationError(FracjumpError, RuntimeError):
    """Degenerate input for an estimator (e.g. a zero denominator)."""
