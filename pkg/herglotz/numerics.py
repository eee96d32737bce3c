"""
Dense linear algebra, second-order forward-mode differentiation, the matrix
exponential and fixed-step RK4 used by every other module.

Dual numbers live in ``dtype=object`` numpy arrays whenever a computation is
being differentiated; every routine here accepts both float and object arrays.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidParameter, NonFiniteState, NumericalError, SingularMatrix

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-12
TAYLOR_DEGREE = 10
SCALING_NORM = 0.25


# ----------------------------
# Dual numbers
# ----------------------------

def _is_scalar(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating))


class Dual2:
    """Truncated second-order jet: value, gradient and Hessian w.r.t. the seeds.

    A Hessian of plain 0.0 stands for the zero matrix, so linear combinations
    of the seeds never touch an n × n array.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, point: Sequence[float]) -> np.ndarray:
        n = len(point)
        eye = np.eye(n)
        seeds = np.empty(n, dtype=object)
        for k, x in enumerate(point):
            seeds[k] = cls(x, eye[k], 0.0)
        return seeds

    def __repr__(self) -> str:
        return f"Dual2({self.value!r}, grad={self.grad!r})"

    def _chain(self, f0: float, f1: float, f2: float) -> "Dual2":
        return Dual2(
            f0,
            f1 * self.grad,
            f1 * self.hess + f2 * np.outer(self.grad, self.grad),
        )

    # --- arithmetic ---

    def __neg__(self) -> "Dual2":
        return Dual2(-self.value, -self.grad, -self.hess)

    def __pos__(self) -> "Dual2":
        return self

    def __add__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        if _is_scalar(other):
            if other == 0:
                return self
            return Dual2(self.value + other, self.grad, self.hess)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)
        if _is_scalar(other):
            return Dual2(self.value - other, self.grad, self.hess)
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return Dual2(other - self.value, -self.grad, -self.hess)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual2):
            cross = np.outer(self.grad, other.grad)
            return Dual2(
                self.value * other.value,
                self.value * other.grad + other.value * self.grad,
                self.value * other.hess + other.value * self.hess + cross + cross.T,
            )
        if _is_scalar(other):
            if other == 0:
                return 0.0
            if other == 1:
                return self
            return Dual2(self.value * other, self.grad * other, self.hess * other)
        return NotImplemented

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual2":
        x = self.value
        if x == 0.0:
            raise DomainError("division by a dual number with zero value")
        return self._chain(1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def __truediv__(self, other):
        if isinstance(other, Dual2):
            return self * other.reciprocal()
        if _is_scalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, power):
        if isinstance(power, Dual2):
            return (power * self.log()).exp()
        if not _is_scalar(power):
            return NotImplemented
        if power == 0:
            return Dual2(1.0, np.zeros_like(self.grad), 0.0)
        if power == 1:
            return self
        x = self.value
        if x <= 0.0 and not float(power).is_integer():
            raise DomainError(f"non-integer power {power} of non-positive value {x}")
        if x == 0.0 and power < 2:
            raise DomainError(f"power {power} is not twice differentiable at zero")
        return self._chain(x**power, power * x ** (power - 1), power * (power - 1) * x ** (power - 2))

    def __rpow__(self, base):
        if not _is_scalar(base):
            return NotImplemented
        return exp(self * math.log(base))

    # --- elementary functions (numpy dispatches object ufuncs to these) ---

    def exp(self) -> "Dual2":
        e = math.exp(self.value)
        return self._chain(e, e, e)

    def log(self) -> "Dual2":
        x = self.value
        if x <= 0.0:
            raise DomainError(f"log of non-positive value {x}")
        return self._chain(math.log(x), 1.0 / x, -1.0 / x**2)

    def sin(self) -> "Dual2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(s, c, -s)

    def cos(self) -> "Dual2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(c, -s, -c)

    def sqrt(self) -> "Dual2":
        x = self.value
        if x <= 0.0:
            raise DomainError(f"sqrt of non-positive dual value {x}")
        r = math.sqrt(x)
        return self._chain(r, 0.5 / r, -0.25 / (r * x))


def _unary(x, dual_fn: Callable, float_fn: Callable):
    if isinstance(x, Dual2):
        return dual_fn(x)
    if isinstance(x, np.ndarray) and x.dtype == object:
        out = np.empty(x.shape, dtype=object)
        for idx, e in np.ndenumerate(x):
            out[idx] = _unary(e, dual_fn, float_fn)
        return out
    return float_fn(x)


def _checked_log(x):
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError(f"log of non-positive value {x}")
    return np.log(x)


def _checked_sqrt(x):
    if np.any(np.asarray(x) < 0.0):
        raise DomainError(f"sqrt of negative value {x}")
    return np.sqrt(x)


def exp(x):
    return _unary(x, Dual2.exp, np.exp)


def log(x):
    return _unary(x, Dual2.log, _checked_log)


def sin(x):
    return _unary(x, Dual2.sin, np.sin)


def cos(x):
    return _unary(x, Dual2.cos, np.cos)


def sqrt(x):
    return _unary(x, Dual2.sqrt, _checked_sqrt)


def atan2(y, x):
    """Two-argument arctangent for floats and scalar dual numbers."""
    if not isinstance(y, Dual2) and not isinstance(x, Dual2):
        return math.atan2(y, x)
    yv, xv = value_of(y), value_of(x)
    r2 = xv * xv + yv * yv
    if r2 == 0.0:
        raise DomainError("atan2 is not differentiable at the origin")
    n = len(y.grad) if isinstance(y, Dual2) else len(x.grad)
    gy = y.grad if isinstance(y, Dual2) else np.zeros(n)
    gx = x.grad if isinstance(x, Dual2) else np.zeros(n)
    hy = y.hess if isinstance(y, Dual2) else np.zeros((n, n))
    hx = x.hess if isinstance(x, Dual2) else np.zeros((n, n))
    fy, fx = xv / r2, -yv / r2
    fyy, fxx, fxy = -2 * xv * yv / r2**2, 2 * xv * yv / r2**2, (yv * yv - xv * xv) / r2**2
    mixed = np.outer(gy, gx)
    return Dual2(
        math.atan2(yv, xv),
        fy * gy + fx * gx,
        fy * hy + fx * hx + fyy * np.outer(gy, gy) + fxx * np.outer(gx, gx) + fxy * (mixed + mixed.T),
    )


def value_of(x):
    """Strip derivative parts: floats for scalars, float arrays for arrays."""
    if isinstance(x, Dual2):
        return x.value
    if isinstance(x, np.ndarray) and x.dtype == object:
        out = np.empty(x.shape, dtype=float)
        for idx, e in np.ndenumerate(x):
            out[idx] = e.value if isinstance(e, Dual2) else float(e)
        return out
    if _is_scalar(x):
        return float(x)
    return np.asarray(x, dtype=float)


def asarray(values) -> np.ndarray:
    """Float array when possible, object array when dual numbers are present."""
    try:
        return np.asarray(values, dtype=float)
    except TypeError:
        return np.asarray(values, dtype=object)


def is_dual(x) -> bool:
    if isinstance(x, Dual2):
        return True
    return isinstance(x, np.ndarray) and x.dtype == object


def eval_jet2(f: Callable[[np.ndarray], object], point) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of a scalar function by dual propagation."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    out = f(Dual2.variables(point))
    if isinstance(out, np.ndarray) and out.shape == ():
        out = out[()]
    if not isinstance(out, Dual2):
        return float(out), np.zeros(n), np.zeros((n, n))
    hess = np.broadcast_to(out.hess, (n, n))
    return out.value, out.grad.copy(), 0.5 * (hess + hess.T)


def linearize(f: Callable[[np.ndarray], object], point) -> tuple[np.ndarray, np.ndarray]:
    """Value and Jacobian of an array-valued function; jac has shape value.shape + (n,)."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    out = np.asarray(f(Dual2.variables(point)), dtype=object)
    value = np.empty(out.shape, dtype=float)
    jac = np.zeros(out.shape + (n,))
    for idx, e in np.ndenumerate(out):
        if isinstance(e, Dual2):
            value[idx] = e.value
            jac[idx] = e.grad
        else:
            value[idx] = float(e)
    return value, jac


def jacobian(f: Callable[[np.ndarray], object], point) -> np.ndarray:
    return linearize(f, point)[1]


def directional_derivative(f: Callable[[np.ndarray], np.ndarray], point, direction, *, step: float = 1e-5):
    """Central difference of f along direction; only for functions that already hold second derivatives."""
    point = np.asarray(point, dtype=float)
    direction = np.asarray(direction, dtype=float)
    forward = np.asarray(f(point + step * direction), dtype=float)
    backward = np.asarray(f(point - step * direction), dtype=float)
    return (forward - backward) / (2 * step)


# ----------------------------
# Linear algebra
# ----------------------------

def _magnitudes(values: np.ndarray) -> np.ndarray:
    return np.abs(value_of(values))


@dataclass(frozen=True)
class LUFactors:
    lu: np.ndarray
    perm: np.ndarray

    def solve(self, b) -> np.ndarray:
        lu, n = self.lu, self.lu.shape[0]
        b = asarray(b)
        if b.shape[0] != n:
            raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, matrix has {n}")
        x = b[self.perm].copy()
        if lu.dtype == object and x.dtype != object:
            x = x.astype(object)
        for i in range(1, n):
            x[i] = x[i] - lu[i, :i] @ x[:i]
        for i in range(n - 1, -1, -1):
            if i < n - 1:
                x[i] = x[i] - lu[i, i + 1 :] @ x[i + 1 :]
            x[i] = x[i] / lu[i, i]
        return x


def lu_factor(a) -> LUFactors:
    """LU with partial pivoting; pivots below PIVOT_TOLERANCE·max|entry| are singular."""
    a = asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    if n == 0:
        return LUFactors(lu=lu, perm=perm)

    tolerance = PIVOT_TOLERANCE * _magnitudes(lu).max()
    for k in range(n):
        column = _magnitudes(lu[k:, k])
        p = int(np.argmax(column))
        pivot = column[p]
        if pivot <= tolerance or pivot == 0.0:
            raise SingularMatrix(
                f"pivot {pivot:.3e} below tolerance {tolerance:.3e} in column {k}"
            )
        if pivot < 1e4 * tolerance:
            logger.debug("Near-singular pivot %.3e in column %d", pivot, k)
        p += k
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1 :, k] = lu[k + 1 :, k] / lu[k, k]
        lu[k + 1 :, k + 1 :] = lu[k + 1 :, k + 1 :] - np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return LUFactors(lu=lu, perm=perm)


def lu_solve(a, b) -> np.ndarray:
    return lu_factor(a).solve(b)


def inverse(a) -> np.ndarray:
    a = asarray(a)
    return lu_solve(a, np.eye(a.shape[0]))


def mat_exp(x) -> np.ndarray:
    """Scaling-and-squaring with a degree-10 Taylor polynomial."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    n = x.shape[0]
    norm = np.abs(x).sum(axis=1).max() if n else 0.0
    squarings = max(0, math.ceil(math.log2(norm / SCALING_NORM))) if norm > SCALING_NORM else 0
    a = x / 2.0**squarings

    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, TAYLOR_DEGREE + 1):
        term = term @ a / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


# ----------------------------
# Time stepping
# ----------------------------

@dataclass(frozen=True)
class OdeProblem:
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]


def time_grid(t0: float, t1: float, h: float) -> np.ndarray:
    """Knots t0 + k·h, with a final shortened step landing exactly on t1."""
    if h <= 0.0:
        raise InvalidParameter(f"step must be positive, got {h}")
    if t1 <= t0:
        raise InvalidParameter(f"end time {t1} must exceed start time {t0}")
    count = (t1 - t0) / h
    steps = round(count)
    if abs(count - steps) > 1e-9 * max(1.0, count):
        steps = math.floor(count)
    times = t0 + h * np.arange(steps + 1)
    if t1 - times[-1] > 1e-9 * h:
        times = np.append(times, t1)
    else:
        times[-1] = t1
    return times


def rk4_step(rhs: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_on_grid(
        problem: OdeProblem,
        y0,
        times: np.ndarray,
        *,
        on_knot: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """RK4 over the given knots; on_knot(t, y) runs at every knot before the step leaving it."""
    y = np.asarray(y0, dtype=float)
    if len(y) != problem.dimension:
        raise DimensionMismatch(f"initial state has {len(y)} entries, problem has {problem.dimension}")

    def located(fn: Callable, t: float, state: np.ndarray):
        try:
            return fn(t, state)
        except NumericalError as e:
            if e.time is not None:
                raise
            raise e.located(time=t, state=state) from e

    def rhs(t, state):
        out = np.asarray(located(problem.rhs, t, state), dtype=float)
        if out.shape != (problem.dimension,):
            raise DimensionMismatch(f"rhs returned shape {out.shape}, expected ({problem.dimension},)")
        return out

    states = np.empty((len(times), problem.dimension))
    states[0] = y
    for k in range(len(times) - 1):
        t, h = times[k], times[k + 1] - times[k]
        if on_knot is not None:
            located(on_knot, t, y)
        y_next = rk4_step(rhs, t, y, h)
        if not np.all(np.isfinite(y_next)):
            raise NonFiniteState("state became non-finite", time=t, state=y)
        states[k + 1] = y = y_next
    if on_knot is not None:
        located(on_knot, times[-1], y)
    return states


class KnotMemo:
    """Evaluations at the grid knots, kept in order and reused by the first RK stage of each step.

    Pass ``record`` as ``on_knot`` and call the memo itself inside the right-hand side.
    """

    def __init__(self, fn: Callable[[float, np.ndarray], object]):
        self.fn = fn
        self.values: list = []
        self._key: tuple[float, bytes] | None = None

    def record(self, t: float, y: np.ndarray) -> None:
        self.values.append(self.fn(t, y))
        self._key = (t, y.tobytes())

    def __call__(self, t: float, y: np.ndarray):
        if self._key is not None and self._key == (t, y.tobytes()):
            return self.values[-1]
        return self.fn(t, y)


def rk4_integrate(problem: OdeProblem, y0, t0: float, t1: float, h: float) -> list[tuple[float, np.ndarray]]:
    times = time_grid(t0, t1, h)
    states = rk4_on_grid(problem, y0, times)
    return list(zip(times.tolist(), states))


# ----------------------------
# Sampled curves
# ----------------------------

def interpolate_cubic(times: np.ndarray, values: np.ndarray, t: float) -> np.ndarray:
    """Four-point Lagrange interpolation of samples values[k] taken at times[k]."""
    n = len(times)
    i = int(np.searchsorted(times, t))
    if i < n and times[i] == t:
        return values[i]
    width = min(4, n)
    j = min(max(i - width // 2, 0), n - width)
    nodes = times[j : j + width]
    weights = np.ones(width)
    for a in range(width):
        for b in range(width):
            if a != b:
                weights[a] *= (t - nodes[b]) / (nodes[a] - nodes[b])
    return np.tensordot(weights, values[j : j + width], axes=1)


def cumulative_trapezoid(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    return np.concatenate([[0.0], np.cumsum(increments)])
