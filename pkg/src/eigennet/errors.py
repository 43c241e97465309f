"""
Exception hierarchy for eigennet.
"""

from typing import Any, Optional


class EigenNetError(Exception):
    """Base class for all eigennet errors."""


class InvalidConfigError(EigenNetError, ValueError):
    """A configuration value violates its invariant."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class InvalidArgumentError(EigenNetError, ValueError):
    """An operation received arguments it cannot work with."""


class NumericError(EigenNetError, ArithmeticError):
    """A non-finite value appeared in a forward or backward pass."""

    def __init__(self, message: str, layer: Optional[int] = None,
                 block: Optional[str] = None):
        self.layer = layer
        self.block = block
        super().__init__(message)


class DegenerateFunctionError(NumericError):
    """The Rayleigh quotient denominator <u, u> vanished."""

    def __init__(self, message: str, output: Optional[int] = None):
        self.output = output
        super().__init__(message)


class AbortedRunError(EigenNetError):
    """Training stopped after too many numeric failures in one epoch."""

    def __init__(self, message: str, record: Any = None, params: Any = None):
        self.record = record
        self.params = params
        super().__init__(message)
