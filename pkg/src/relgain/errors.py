"""Exception types shared across the package."""
from __future__ import annotations


class RelgainError(Exception):
    """Base class for all package-specific errors."""


class GraphFormatError(RelgainError):
    """Raised when an edge-list file cannot be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class CapExceededError(RelgainError):
    """Raised when a problem instance exceeds a configured feasibility cap."""


class ConvergenceError(RelgainError):
    """Raised when an iterative numerical routine fails to converge."""
