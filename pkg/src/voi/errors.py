"""Exception types raised by the engine and the case-study models."""


class VoiError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(VoiError, ValueError):
    """An argument violates a documented precondition."""


class NumericalError(VoiError, ArithmeticError):
    """A model produced a non-finite or non-physical value."""


class ConstructionError(VoiError, ValueError):
    """A derived object (load profile, cost surface) cannot be built."""


class ConfigError(VoiError, ValueError):
    """A run configuration or input document is invalid."""
