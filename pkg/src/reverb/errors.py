"""Exception types shared across the package."""


class ReverbError(Exception):
    """Base class for all package errors."""


class InputError(ReverbError, ValueError):
    """Rejected input: non-finite values or out-of-contract arguments."""


class ConfigError(ReverbError, ValueError):
    """Invalid or inconsistent configuration."""


class DomainError(ReverbError, ValueError):
    """Argument outside a special function's or formula's domain."""


class NumericalError(ReverbError, RuntimeError):
    """Numerical failure: lost symmetry/definiteness, singular system, ..."""


class InfeasibleError(ReverbError, RuntimeError):
    """No physical solution exists for the requested link parameters."""


class TrainingError(ReverbError, RuntimeError):
    """Non-finite gradients or losses during policy optimization."""
