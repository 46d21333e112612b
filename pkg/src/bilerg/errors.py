"""Exception types shared across the package."""


class BilergError(Exception):
    """Base class for all errors raised by bilerg."""


class ConfigurationError(BilergError, ValueError):
    """Inconsistent grid, padding, dimension or experiment configuration."""


class DomainError(BilergError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResonanceError(DomainError):
    """A frequency sits too close to the kernel of ``U^delta - I``."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


class ConvergenceError(BilergError, ArithmeticError):
    """Quadrature failed to converge before the panel cap.

    Both of the last two iterates are kept so the caller can decide whether
    the result is usable anyway.
    """

    def __init__(self, message, previous=None, last=None, panels=None):
        super().__init__(message)
        self.previous = previous
        self.last = last
        self.panels = panels
