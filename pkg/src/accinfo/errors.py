"""Exception types shared across the package."""


class AccInfoError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(AccInfoError, ValueError):
    pass


class ShapeMismatch(AccInfoError, ValueError):
    pass


class IndexOutOfRange(AccInfoError, IndexError):
    pass


class RangeError(AccInfoError, ValueError):
    pass


class NotConverged(AccInfoError, ArithmeticError):
    """Fixpoint iteration hit its iteration cap."""


class SpectrumOutOfRange(AccInfoError, ArithmeticError):
    """Matrix spectrum is outside the fixpoint iteration's basin (0, 3)."""


class SingularMatrix(AccInfoError, ArithmeticError):
    pass


class NegativeProbability(AccInfoError, ValueError):
    """A joint probability came out clearly negative; the POVM is corrupted."""


class StepFailed(AccInfoError, ArithmeticError):
    """An iteration round produced a non-invertible normalizer."""


class NoProgress(AccInfoError, RuntimeError):
    """Step size underflowed before any round was accepted."""


class RangeWarning(UserWarning):
    """Closed-form result evaluated outside its range of validity."""
