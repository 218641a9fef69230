"""
Exception hierarchy shared by every nonlocal_lab module.

- NonlocalError: base class, a ValueError so argument problems read naturally.
- DomainError: arguments outside their admissible range, coarse grids, mismatched
  domains, subsets that leave the domain.
- QuadratureError: an integral that would not converge (names the offending
  pair or point and the achieved tolerance).
- ConvergenceError: iterative solvers that stop before their tolerance.
- HypothesisViolation: a kernel that does not satisfy what a check or bound needs.
- IncompatibleDataError: data that the problem cannot accept (Neumann data with
  nonzero mean, stabilization without a far-field limit).
- ConfigError: configuration parse or validation failures, with line numbers.
"""

from __future__ import annotations

from typing import Optional


class NonlocalError(ValueError):
    """Base class for all library errors."""


class DomainError(NonlocalError):
    """An argument lies outside the range an operation accepts."""


class QuadratureError(NonlocalError):
    """
    Quadrature did not reach its tolerance.

    The achieved error estimate is kept on the instance so callers can report it.
    """

    def __init__(self, message: str, achieved: Optional[float] = None):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(NonlocalError):
    """An iterative method stopped before meeting its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None, iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class HypothesisViolation(NonlocalError):
    """The kernel or data violate the hypothesis an operation relies on."""


class IncompatibleDataError(NonlocalError):
    """The data cannot be accepted by the problem being solved."""


class ConfigError(NonlocalError):
    """A configuration file could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        # Prefix the line number so CLI messages point straight at the file.
        text = f"line {line}: {message}" if line is not None else message
        super().__init__(text)
        self.line = line
