"""Exception and warning taxonomy shared across the package."""


class DomainError(ValueError):
    """An argument violates a mathematical precondition."""


class SingularityError(DomainError):
    """Evaluation requested at (or too close to) the singular point x = 0."""


class BranchCutError(DomainError):
    """A spectral shift lies on the branch cut (-inf, 0]."""


class PoleError(DomainError):
    """A spectral shift coincides with the coupling pole alpha + c(omega) = 0."""


class ConditioningError(RuntimeError):
    """A shift is too close to the spectrum for a well-conditioned solve."""


class AdmissibilityError(DomainError):
    """An exponent tuple violates its admissibility window.

    The message names the violated constraint, e.g. ``p not in (3/2,3) if d=3``.
    """

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class QuadratureError(RuntimeError):
    """The adaptive panel quadrature did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class QuadratureDivergenceError(QuadratureError):
    """Panel contributions plateau instead of decaying; the integral diverges."""


class InsufficientWindowError(RuntimeError):
    """The usable time window is too short for the requested measurement."""


class AccuracyWarning(UserWarning):
    """The returned value may not meet the requested tolerance."""


class TruncationWarning(UserWarning):
    """Box truncation is marginal for the requested spectral shift."""


class ResolutionWarning(UserWarning):
    """The bound state exists but is narrower than the grid can resolve."""
