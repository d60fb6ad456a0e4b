"""
core/errors.py
==============
Exception hierarchy for the DP soliton lab.

Every exception carries the process exit code the CLI reports for it:
    1  validation failure (bad parameters, grids, config, ranges)
    2  numerical failure (bracketing, convergence, blow-up)
    3  baseline mismatch in verify mode
"""


class DPLabError(Exception):
    """Base class for all lab errors."""

    exit_code = 2


class ValidationError(DPLabError):
    """Input violates a documented precondition."""

    exit_code = 1


class GridMismatchError(ValidationError):
    """Two fields (or a field and a profile) live on different grids."""


class NonDecayingFieldError(ValidationError):
    """Line field does not decay at the grid boundary."""


class NumericalError(DPLabError):
    """A numerical procedure failed to deliver a trustworthy result."""

    exit_code = 2


class ProfileError(NumericalError):
    """Soliton profile construction failed (tail, quadrature, ODE)."""


class ConvergenceError(NumericalError):
    """Iteration, ODE or BVP solve did not converge to tolerance."""


class BracketError(NumericalError):
    """Shooting function does not change sign on the search interval."""


class IdentityDefectError(NumericalError):
    """An analytic identity is violated beyond tolerance."""


class BlowUpError(NumericalError):
    """Time integration diverged (field magnitude or drift exploded)."""


class BaselineMismatch(DPLabError):
    """Fresh run disagrees with a saved regression baseline."""

    exit_code = 3

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
