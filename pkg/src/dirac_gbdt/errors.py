"""Exception hierarchy shared by all modules."""

import numpy as np


class DiracGbdtError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DiracGbdtError, ValueError):
    """Operands have incompatible or invalid shapes."""


class SingularEquationError(DiracGbdtError, np.linalg.LinAlgError):
    """A linear (matrix) equation has no unique solution."""


class PoleError(DiracGbdtError, np.linalg.LinAlgError):
    """An evaluation point lies at (or numerically too close to) a pole."""


class ConditioningError(DiracGbdtError, np.linalg.LinAlgError):
    """A matrix that must stay positive definite lost positivity numerically."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(DiracGbdtError, RuntimeError):
    """An iterative limit did not settle within the allowed number of steps."""

    def __init__(self, message, increments=None):
        super().__init__(message)
        self.increments = increments


class GenerationError(DiracGbdtError, RuntimeError):
    """Random triple generation exhausted its attempts."""

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts
