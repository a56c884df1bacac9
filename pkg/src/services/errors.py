"""
Exception hierarchy shared by the estimation services and the CLI.

The CLI maps every TestimationError to exit code 2 (validation failure);
I/O problems surface as OSError and map to exit code 1.
"""

from typing import Dict, Optional


class TestimationError(Exception):
    """Base class for all domain errors."""

    __test__ = False  # keep pytest from collecting this as a test class

    def __init__(self, message: str, details: Optional[str] = None):
        self.message = message
        self.details = details
        super().__init__(message if details is None else f"{message} ({details})")


class InvalidParameterError(TestimationError, ValueError):
    """A scalar parameter (q, n, j0, alpha, zone...) is out of its admissible range."""


class InvalidInputError(TestimationError, ValueError):
    """An input vector or structure is malformed."""


class UnsupportedFilterError(TestimationError):
    """Requested wavelet filter is not in the filter bank."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unsupported wavelet filter: {name}")


class UnsupportedSignalError(TestimationError):
    """Requested test signal is not defined."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unsupported test signal: {name}")


class ConfigValidationError(TestimationError):
    """Experiment configuration failed validation; one message per offending field."""

    def __init__(self, field_errors: Dict[str, str]):
        self.field_errors = dict(field_errors)
        summary = "; ".join(f"{k}: {v}" for k, v in sorted(self.field_errors.items()))
        super().__init__("Invalid experiment configuration", summary)
