"""Exception taxonomy shared by all modules.

Every error raised by this package derives from IsdeError so callers can
catch the whole family with one clause. Subclasses also inherit from the
closest builtin (ValueError, ArithmeticError, ...) where one applies.
"""

from __future__ import annotations


class IsdeError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(IsdeError, ValueError):
    """Invalid argument value or domain violation (nonpositive scale, t out of range, ...)."""


class ShapeError(IsdeError, ValueError):
    """State vectors with incompatible shapes."""


class SingularityError(IsdeError, ArithmeticError):
    """A schedule quantity diverges or degenerates (k(t) -> 1, sigma_t = 0, zero variance)."""


class ScheduleConsistencyError(IsdeError, ArithmeticError):
    """A schedule identity is violated beyond tolerance (e.g. negative g^2 from a variance)."""


class QuadratureError(IsdeError):
    """Base class for numerical-integration failures."""


class QuadratureDomainError(QuadratureError, ValueError):
    """The integrand returned a nonfinite value at a sample point."""


class QuadratureToleranceError(QuadratureError, ArithmeticError):
    """Requested tolerance not reached within the subdivision budget.

    Carries the best available estimate in ``result`` (a QuadResult).
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class DivergenceError(IsdeError, ArithmeticError):
    """A solve produced a nonfinite state; reports the offending step and time."""

    def __init__(self, message, step_index=None, time=None):
        super().__init__(message)
        self.step_index = step_index
        self.time = time


class StiffnessError(IsdeError, ArithmeticError):
    """Adaptive step size underflowed (or the step budget was exhausted)."""


class ConfigError(IsdeError, ValueError):
    """Invalid or incomplete experiment configuration; message names the offender."""
