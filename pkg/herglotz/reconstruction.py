"""
Hessian-induced principal connection on TQ×ℝ and reconstruction of full
trajectories from reduced ones.

With g_ab = Ẽ_aᵀ W Ẽ_b and g_ib = X_iᵀ W Ẽ_b, the connection form satisfies
Ω(X_i^C) = B^a_i E_a, Ω(Ẽ_a^C) = E_a and annihilates vertical lifts and ∂/∂s,
where B^a_i = g^{ba} g_ib. A reduced curve is lifted horizontally and moved
back onto the true solution by g(t) with ġ = g ξ, ξ = A w + B v, g(0) = e.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from . import numerics as nx
from .bundle import BundleChart, Frames, frame_fields, from_quasi, to_natural
from .contact import ContactLagrangian, velocity_hessian
from .entities import FullState, GroupStepper, Trajectory, quasi_columns
from .errors import InvalidParameter, NonGRegularAtState, NumericalError, SingularMatrix
from .lie import GroupElement, MatrixGroup, dexpinv

logger = logging.getLogger(__name__)

START_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class HessianBlocks:
    g_ij: np.ndarray
    g_ib: np.ndarray
    g_ab: np.ndarray
    B: np.ndarray

    def matrix(self) -> np.ndarray:
        """The Hessian in the ordered basis {Ẽ_a, X_i}."""
        return np.block([[self.g_ab, self.g_ib.T], [self.g_ib, self.g_ij]])

    def vertical_inverse(self) -> np.ndarray:
        return nx.inverse(self.g_ab)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    horizontal_lift: Trajectory
    group_curve: list[tuple[float, GroupElement]]
    full_trajectory: Trajectory


def blocks_at(
        lagrangian: ContactLagrangian,
        chart: BundleChart,
        q,
        u,
        s,
        *,
        frames: Frames | None = None,
) -> HessianBlocks:
    w_hess = velocity_hessian(lagrangian, q, u, s)
    if frames is None:
        frames = frame_fields(chart, q)
    x, et = nx.value_of(frames.X), nx.value_of(frames.Etilde)
    g_ij = x.T @ w_hess @ x
    g_ib = x.T @ w_hess @ et
    g_ab = et.T @ w_hess @ et
    try:
        b = nx.lu_solve(g_ab, g_ib.T) if chart.fiber_dim else np.zeros((0, chart.base_dim))
    except SingularMatrix as e:
        raise NonGRegularAtState(f"vertical Hessian block g_ab is singular ({e})") from e
    return HessianBlocks(g_ij=g_ij, g_ib=g_ib, g_ab=g_ab, B=np.asarray(b, dtype=float).reshape(chart.fiber_dim, chart.base_dim))


def hessian_blocks(lagrangian: ContactLagrangian, chart: BundleChart, state: FullState) -> HessianBlocks:
    natural = to_natural(chart, state)
    return blocks_at(lagrangian, chart, natural.q, natural.u, natural.s)


# ----------------------------
# Connection form
# ----------------------------

def connection_form(lagrangian: ContactLagrangian, chart: BundleChart, q, u, s) -> np.ndarray:
    """Ω as a d × (2n+1) matrix acting on tangent vectors (δq, δu, δs)."""
    n, d = chart.dim, chart.fiber_dim
    blocks = blocks_at(lagrangian, chart, q, u, s)
    frames = frame_fields(chart, q)
    basis = nx.value_of(np.hstack([frames.X, frames.Etilde]))
    on_positions = nx.lu_solve(basis.T, np.hstack([blocks.B, np.eye(d)]).T).T
    return np.hstack([on_positions, np.zeros((d, n + 1))])


def _lifts(chart: BundleChart, field: str, q, u) -> tuple[np.ndarray, np.ndarray]:
    """Complete and vertical lifts (columns) of a frame on TQ×ℝ."""
    n = chart.dim
    value, d_value = nx.linearize(lambda z: getattr(frame_fields(chart, z), field), q)
    count = value.shape[1]
    complete = np.vstack([value, np.einsum("kal,l->ka", d_value, u), np.zeros((1, count))])
    vertical = np.vstack([np.zeros((n, count)), value, np.zeros((1, count))])
    return complete, vertical


def connection_axioms_check(lagrangian: ContactLagrangian, chart: BundleChart, q, u, s) -> dict[str, float]:
    q, u = np.asarray(q, dtype=float), np.asarray(u, dtype=float)
    n, d = chart.dim, chart.fiber_dim
    omega = connection_form(lagrangian, chart, q, u, s)
    blocks = blocks_at(lagrangian, chart, q, u, s)
    x_c, x_v = _lifts(chart, "X", q, u)
    et_c, et_v = _lifts(chart, "Etilde", q, u)
    eh_c, _ = _lifts(chart, "Ehat", q, u)
    horizontal = x_c - et_c @ blocks.B
    d_ds = np.zeros(2 * n + 1)
    d_ds[-1] = 1.0

    def sup(values) -> float:
        return float(np.max(np.abs(values), initial=0.0))

    return {
        "Omega(X^V) = 0": sup(omega @ x_v),
        "Omega(Et^V) = 0": sup(omega @ et_v),
        "Omega(d/ds) = 0": sup(omega @ d_ds),
        "Omega(H_i) = 0": sup(omega @ horizontal),
        "Omega(Et_a^C) = E_a": sup(omega @ et_c - np.eye(d)),
        "Omega(Eh_a^C) = A^b_a E_b": sup(omega @ eh_c - nx.value_of(chart.adjoint(q))),
    }


def equivariance_check(lagrangian: ContactLagrangian, chart: BundleChart, q, u, s, *, step: float = 1e-5) -> float:
    """max |Ẽ_a^C(B^d_i) − B^b_i C^d_ab|, differentiating B by central differences."""
    n = chart.dim
    q, u = np.asarray(q, dtype=float), np.asarray(u, dtype=float)
    z = np.concatenate([q, u, [s]])
    blocks = blocks_at(lagrangian, chart, q, u, s)
    et_c, _ = _lifts(chart, "Etilde", q, u)
    structure = chart.algebra.structure_constants

    def b_at(y):
        return blocks_at(lagrangian, chart, y[:n], y[n : 2 * n], y[2 * n]).B

    worst = 0.0
    for a in range(chart.fiber_dim):
        derivative = nx.directional_derivative(b_at, z, et_c[:, a], step=step)
        expected = np.einsum("bi,db->di", blocks.B, structure[:, a, :])
        worst = max(worst, float(np.max(np.abs(derivative - expected), initial=0.0)))
    return worst


# ----------------------------
# Horizontal lift
# ----------------------------

def _blocks_on_lift(lagrangian: ContactLagrangian, chart: BundleChart, q, v, w, s) -> tuple[Frames, HessianBlocks]:
    frames = frame_fields(chart, np.asarray(q, dtype=float))
    x, eh = nx.value_of(frames.X), nx.value_of(frames.Ehat)
    u = x @ np.asarray(v, dtype=float) + eh @ np.asarray(w, dtype=float)
    return frames, blocks_at(lagrangian, chart, q, u, s, frames=frames)


def _fibre_rate(chart: BundleChart, frames: Frames, blocks: HessianBlocks, v) -> np.ndarray:
    m = chart.base_dim
    x_fiber = nx.value_of(frames.X)[m:, :]
    k = nx.value_of(frames.Etilde)[m:, :]
    return x_fiber @ v - k @ (blocks.B @ v)


def _algebra_rate(chart: BundleChart, q, blocks: HessianBlocks, v, w) -> np.ndarray:
    return nx.value_of(chart.adjoint(q)) @ w + blocks.B @ v


def lift_velocity(lagrangian: ContactLagrangian, chart: BundleChart, q, v, w, s, *, t: float | None = None) -> np.ndarray:
    """Fibre velocity of the horizontal lift: ḣ = X_fibre v − K (B v)."""
    try:
        frames, blocks = _blocks_on_lift(lagrangian, chart, q, v, w, s)
    except NonGRegularAtState as e:
        raise NonGRegularAtState(e.message, time=t, state=q) from e
    return _fibre_rate(chart, frames, blocks, v)


def algebra_velocity(lagrangian: ContactLagrangian, chart: BundleChart, q, v, w, s) -> np.ndarray:
    """ξ = A(h) w + B v at a point of the lift."""
    _, blocks = _blocks_on_lift(lagrangian, chart, q, v, w, s)
    return _algebra_rate(chart, q, blocks, v, w)


def _xi_columns(d: int) -> list[str]:
    return [f"xi{a}" for a in range(d)]


def horizontal_lift(reduced: Trajectory, chart: BundleChart, lagrangian: ContactLagrangian, start: FullState) -> Trajectory:
    m, d = chart.base_dim, chart.fiber_dim
    first = reduced.values[0]
    mismatch = float(np.max(np.abs(first - start.reduced().to_vector()), initial=0.0))
    if mismatch > START_TOLERANCE:
        raise InvalidParameter(f"start does not project onto the reduced initial point (mismatch {mismatch:.3e})")

    def point_at(t, h):
        y = nx.interpolate_cubic(reduced.times, reduced.values, t)
        q = np.concatenate([y[:m], h])
        v, w, s = y[m : 2 * m], y[2 * m : 2 * m + d], y[2 * m + d]
        frames, blocks = _blocks_on_lift(lagrangian, chart, q, v, w, s)
        return q, v, w, frames, blocks

    # frames and Hessian blocks at the knots serve both the first RK stage and ξ
    knots = nx.KnotMemo(point_at)

    def rhs(t, h):
        _, v, _, frames, blocks = knots(t, h)
        return _fibre_rate(chart, frames, blocks, v)

    start_clock = time.perf_counter()
    fibers = nx.rk4_on_grid(nx.OdeProblem(dimension=d, rhs=rhs), start.q_fiber, reduced.times, on_knot=knots.record)
    logger.info("Horizontal lift finished in %.2fs", time.perf_counter() - start_clock)

    values = np.hstack([reduced.values[:, :m], fibers, reduced.values[:, m:]])
    xi = np.array([
        _algebra_rate(chart, q, blocks, v, w) for q, v, w, _, blocks in knots.values
    ]).reshape(len(fibers), d)
    return Trajectory(
        times=reduced.times,
        values=values,
        columns=quasi_columns(m + d, m, d),
        diagnostics={name: xi[:, a] for a, name in enumerate(_xi_columns(d))},
    )



def horizontality_residual(lift: Trajectory, chart: BundleChart, lagrangian: ContactLagrangian) -> float:
    """max |Ω(ċ)| at interior knots, ċ by central differences of the lift."""
    n, m, d = chart.dim, chart.base_dim, chart.fiber_dim
    worst = 0.0
    for k in range(1, len(lift) - 1):
        y = lift.values[k]
        q = y[:n]
        u = nx.value_of(from_quasi(chart, q, y[n : n + m], y[n + m : n + m + d]))
        dq = (lift.values[k + 1, :n] - lift.values[k - 1, :n]) / (lift.times[k + 1] - lift.times[k - 1])
        omega = connection_form(lagrangian, chart, q, u, y[-1])
        worst = max(worst, float(np.max(np.abs(omega[:, :n] @ dq), initial=0.0)))
    return worst


# ----------------------------
# Group ODE ġ = g ξ
# ----------------------------

def _advance(group: MatrixGroup, g: GroupElement, u: np.ndarray) -> GroupElement:
    return group.from_matrix(g.matrix @ nx.mat_exp(group.algebra.matrix(u)))


def solve_group_ode(
        group: MatrixGroup,
        times: np.ndarray,
        xi_samples: np.ndarray,
        *,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> list[tuple[float, GroupElement]]:
    """Integrate ġ = g ξ(t), g(t₀) = e, with ξ known at the knots and interpolated between them."""
    spec = group.algebra
    g = group.identity()
    curve = [(float(times[0]), g)]
    for k in range(len(times) - 1):
        t, h = times[k], times[k + 1] - times[k]
        xi_mid = nx.interpolate_cubic(times, xi_samples, t + 0.5 * h)
        match stepper:
            case GroupStepper.midpoint:
                u = h * xi_mid
            case GroupStepper.rkmk4:
                k1 = xi_samples[k]
                k2 = dexpinv(spec, -0.5 * h * k1, xi_mid)
                k3 = dexpinv(spec, -0.5 * h * k2, xi_mid)
                k4 = dexpinv(spec, -h * k3, xi_samples[k + 1])
                u = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            case _:
                raise InvalidParameter(f"unknown group stepper {stepper!r}")
        try:
            g = _advance(group, g, u)
        except NumericalError as e:
            if e.time is not None:
                raise
            raise e.located(time=t, state=g.coords) from e
        curve.append((float(times[k + 1]), g))
    return curve


def reconstruction_ode(
        lift: Trajectory,
        chart: BundleChart,
        *,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> list[tuple[float, GroupElement]]:
    xi = np.column_stack([lift.diagnostics[name] for name in _xi_columns(chart.fiber_dim)]) \
        if chart.fiber_dim else np.zeros((len(lift), 0))
    return solve_group_ode(chart.group, lift.times, xi, stepper=stepper)


def reconstruct(
        reduced: Trajectory,
        chart: BundleChart,
        lagrangian: ContactLagrangian,
        start: FullState,
        *,
        stepper: GroupStepper = GroupStepper.rkmk4,
) -> ReconstructionResult:
    """c(t) = g(t)·c̆^H(t); quasi-velocities are invariant so only the fibre point moves."""
    m, d = chart.base_dim, chart.fiber_dim
    lift = horizontal_lift(reduced, chart, lagrangian, start)
    curve = reconstruction_ode(lift, chart, stepper=stepper)

    values = lift.values.copy()
    for k, (_, g) in enumerate(curve):
        values[k, m : m + d] = chart.group.compose(g.coords, lift.values[k, m : m + d])

    full = Trajectory(
        times=lift.times,
        values=values,
        columns=lift.columns,
        diagnostics={name: column for name, column in reduced.diagnostics.items()},
    )
    return ReconstructionResult(horizontal_lift=lift, group_curve=curve, full_trajectory=full)
