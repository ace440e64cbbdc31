"""Error hierarchy for the solver.

Every failure the CLI distinguishes has its own class so that the exit-code
mapping in ``src.main`` stays a simple lookup.
"""

import numpy as np


class CovsteerError(Exception):
    """Base class for all solver errors."""


class IterationError(CovsteerError):
    """An iterative kernel (eigensolver, momentum inversion) did not converge."""


class InstanceValidationError(CovsteerError, ValueError):
    """Input matrices or problem data violate a stated invariant."""


class IntegrationError(CovsteerError):
    """The extremal flow left the SPD cone.

    Attributes:
        time: Grid time at which the failure was detected
    """

    def __init__(self, message: str, time: float) -> None:
        super().__init__(message)
        self.time = time


class ShootingError(CovsteerError):
    """A shooting residual evaluation failed.

    Attributes:
        lambda0: Costate that was being evaluated
    """

    def __init__(self, message: str, lambda0: np.ndarray) -> None:
        super().__init__(message)
        self.lambda0 = lambda0


class ConvergenceError(CovsteerError):
    """Levenberg-Marquardt exhausted its iteration budget.

    Attributes:
        best_residual: Smallest residual norm reached
        best_lambda0: Costate at which it was reached
        iterations: Outer iterations performed
    """

    def __init__(
        self, message: str, best_residual: float, best_lambda0: np.ndarray, iterations: int
    ) -> None:
        super().__init__(message)
        self.best_residual = best_residual
        self.best_lambda0 = best_lambda0
        self.iterations = iterations
