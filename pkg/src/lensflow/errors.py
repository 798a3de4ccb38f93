"""Exception types shared across the package."""


class LensflowError(Exception):
    """Base class for all package errors."""


class DomainError(LensflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ArithmeticFault(LensflowError, ArithmeticError):
    """Two internal evaluation routes disagreed beyond their guard tolerance."""


class ConstructionError(LensflowError, RuntimeError):
    """Profile construction produced an inconsistent object."""


class IntegrationError(LensflowError, RuntimeError):
    """An ODE integration failed before reaching a classifiable state."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ValidationFailure(LensflowError, RuntimeError):
    """A validation residual exceeded its certified tolerance."""
