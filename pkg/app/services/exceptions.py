"""
Solver Exceptions

Domain errors raised by the packing services. Routes map them to
HTTPException and the CLI maps them to exit codes.
"""

from typing import Optional


class SolverError(Exception):
    """Base class for every error raised by the solver services."""


class InstanceParseError(SolverError, ValueError):
    """Raised when an instance file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DffParameterError(SolverError, ValueError):
    """Raised when a dual feasible function is evaluated outside its parameter range."""


class LpError(SolverError, RuntimeError):
    """Raised when a linear program cannot be solved to optimality."""


class InvariantViolation(SolverError, RuntimeError):
    """Raised when a certified result fails verification."""
