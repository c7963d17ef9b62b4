"""
Exception types raised by the clustering package.
"""

from typing import Any, Mapping, Optional


class InputError(ValueError):
    """Malformed input: bad dimensions, parameters, files or cells."""

    def __init__(self, message: str, context: Optional[Mapping[str, Any]] = None):
        self.context = dict(context or {})
        if self.context:
            details = ", ".join(f"{key}={value}" for key, value in self.context.items())
            message = f"{message} ({details})"
        super().__init__(message)


class DegenerateClusterError(ArithmeticError):
    """A cluster whose statistics cannot support a nonsingular Gaussian model."""


class OptimizationError(RuntimeError):
    """The optimizer could not produce any valid partition."""
