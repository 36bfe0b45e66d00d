"""Exception hierarchy shared by all modules."""


class RWDiffError(Exception):
    """Base class for every error raised by rwdiff."""


class DomainError(RWDiffError, ValueError):
    """A geometric quantity was requested outside its domain (t <= t_min)."""


class ParameterError(RWDiffError, ValueError):
    pass


class QuadratureError(RWDiffError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DegenerateVelocityError(RWDiffError, ValueError):
    """The spatial velocity vanishes, so its direction is undefined."""


class DegenerateClockError(RWDiffError, ArithmeticError):
    """tdot == 1 at an interior grid point; the clock integrand is infinite."""


class NumericalRankError(RWDiffError, ArithmeticError):
    pass


class PseudoNormBlowupError(RWDiffError, ArithmeticError):
    """The pseudo-norm defect exceeded the integrator's alarm threshold."""

    def __init__(self, message, step_index=None, defect=None):
        super().__init__(message)
        self.step_index = step_index
        self.defect = defect


class AntipodalDegeneracyError(RWDiffError, ArithmeticError):
    pass


class PathTooShortError(RWDiffError, ValueError):
    pass


class GridRangeError(RWDiffError, ValueError):
    pass


class ConfigError(RWDiffError, ValueError):
    """Config text could not be parsed or failed validation.

    ``problems`` lists every violation found, one string per field.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]
