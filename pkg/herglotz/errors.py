from typing import Any

import numpy as np


class HerglotzError(Exception):
    """Base class for every error raised by the package."""


# ----------------------------
# Numerical failures (exit status 2)
# ----------------------------

class NumericalError(HerglotzError):
    def __init__(self, message: str, *, time: float | None = None, state: Any = None):
        self.message = message
        self.time = time
        self.state = None if state is None else np.asarray(state, dtype=float)
        details = message
        if time is not None:
            details += f" at t={time:.6g}"
        if self.state is not None:
            details += f", state={np.array2string(self.state, precision=6)}"
        super().__init__(details)

    def located(self, *, time: float, state: Any) -> "NumericalError":
        """The same failure, tagged with where along the trajectory it happened."""
        return type(self)(self.message, time=time, state=state)


class SingularMatrix(NumericalError):
    pass


class NonRegularLagrangianAtState(SingularMatrix):
    # W = ∂²L/∂u∂u lost rank
    pass


class NonGRegularAtState(SingularMatrix):
    # vertical Hessian block g_ab lost rank
    pass


class NonFiniteState(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class ChartOutOfRange(NumericalError):
    pass


class BasisNotClosed(NumericalError):
    pass


# ----------------------------
# Input failures (exit status 1)
# ----------------------------

class DimensionMismatch(HerglotzError, ValueError):
    pass


class InvalidParameter(HerglotzError, ValueError):
    pass


class ConfigError(HerglotzError, ValueError):
    pass
