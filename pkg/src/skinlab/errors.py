"""Exception hierarchy shared by all skinlab modules.

Two broad classes matter to callers: :class:`ValidationError` for bad inputs
or configs (CLI exit code 1) and :class:`NumericError` for solver failures
(CLI exit code 2).
"""


class SkinlabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SkinlabError):
    """Invalid parameters, preconditions, or configuration."""


class NumericError(SkinlabError):
    """A numerical kernel failed to produce a trustworthy result."""


class ConvergenceError(NumericError):
    """Iterative solver exceeded its iteration cap.

    Carries ``residuals`` (per-root or per-eigenvalue diagnostics) when the
    solver can provide them.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DeflationError(NumericError):
    """Synthetic division at a point that is not a root within tolerance."""


class RootPairingError(NumericError):
    """Inverse-pair matching of polynomial roots failed."""


class DegenerateSpectrumError(NumericError):
    """Non-degenerate perturbation theory applied to a degenerate spectrum."""
