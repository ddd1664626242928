"""Exception hierarchy shared by all modules.

Every failure mode that a caller can meaningfully react to gets its own
class; anything else is a plain bug and raises the usual builtins.
"""


class LabError(Exception):
    """Base class for all package errors."""


class DomainError(LabError):
    """Input outside the convergence/validity domain of an operation."""


class PrecisionError(LabError):
    """An operation would need more digits than the inputs carry."""


class ShapeError(LabError):
    """Structurally incompatible objects (tower/point/scheme mismatch)."""


class ResourceError(LabError):
    """A configured enumeration or support-size guard was exceeded."""


class IntegralityError(LabError):
    """A value that must lie in the base ring of integers does not."""


class ConvergenceError(LabError):
    """An iteration whose defect must contract failed to contract."""


class FlagError(LabError):
    """A matrix does not satisfy the normality flags an operation needs."""


class WindowError(LabError):
    """A monomial window is too tight: dropped terms are not negligible."""


class StabilizationError(LabError):
    """Window doubling failed to stabilize series coefficients."""


class UnitError(LabError):
    """An element required to be a unit is not."""


class SlopeError(LabError):
    """A Newton polygon does not show the expected slope pattern."""


class RecognitionError(LabError):
    """A series expected to terminate as a polynomial does not."""


class UnsupportedSchemeError(LabError):
    """The operation is only implemented for one-dimensional base schemes."""


class BoundCheckError(LabError):
    """A claimed valuation bound fails; carries a witness coefficient."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
