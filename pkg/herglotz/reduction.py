"""
Reduced dynamics on (TQ/G)×ℝ in the variables (q^i, v^i, w^a, s).

The Lagrange-Poincaré-Herglotz equations

    d/dt ∂l/∂v^i − ∂l/∂q^i = (K^a_ik v^k − Υ^a_ib w^b) ∂l/∂w^a + (∂l/∂s) ∂l/∂v^i
    d/dt ∂l/∂w^a           = (Υ^b_ia v^i − C^b_ac w^c) ∂l/∂w^b + (∂l/∂s) ∂l/∂w^a
    ds/dt = l

are expanded by the chain rule into one linear system for (v̇, ẇ).
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics as nx
from .bundle import BundleChart, curvature, frame_fields, from_quasi, to_full, upsilon
from .contact import ContactLagrangian, dissipation_diagnostics
from .entities import NaturalState, ReducedState, Trajectory, quasi_columns
from .errors import NonGRegularAtState, SingularMatrix
from .lie import LieAlgebraSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReducedLagrangian:
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray, object], object]
    base_dim: int
    fiber_dim: int

    def __call__(self, q_base, v, w, s):
        return self.fn(q_base, v, w, s)

    @property
    def size(self) -> int:
        return 2 * self.base_dim + self.fiber_dim + 1

    def jet(self, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        m, d = self.base_dim, self.fiber_dim
        return nx.eval_jet2(
            lambda z: self.fn(z[:m], z[m : 2 * m], z[2 * m : 2 * m + d], z[2 * m + d]),
            y,
        )


def reduce_lagrangian(lagrangian: ContactLagrangian, chart: BundleChart) -> ReducedLagrangian:
    """l(q^i, v, w, s) = L(q at the fibre identity, from_quasi(v, w), s)."""
    d = chart.fiber_dim

    def fn(q_base, v, w, s):
        q = nx.asarray(np.concatenate([np.asarray(q_base, dtype=object), np.zeros(d, dtype=object)]))
        return lagrangian(q, from_quasi(chart, q, v, w), s)

    return ReducedLagrangian(fn=fn, base_dim=chart.base_dim, fiber_dim=d)


def invariance_check(lagrangian: ContactLagrangian, chart: BundleChart, states: list[NaturalState]) -> float:
    """max |Ẽ_a^C(L)| over the given states; zero for a G-invariant Lagrangian."""
    n = lagrangian.dim
    worst = 0.0
    for state in states:
        q, u = np.asarray(state.q, dtype=float), np.asarray(state.u, dtype=float)
        z = np.concatenate([q, u, [state.s]])
        _, grad = nx.linearize(lambda y: lagrangian(y[:n], y[n : 2 * n], y[2 * n]), z)
        et, d_et = nx.linearize(lambda y: frame_fields(chart, y).Etilde, q)
        lifted_u = np.einsum("kal,l->ka", d_et, u)
        residual = grad[:n] @ et + grad[n : 2 * n] @ lifted_u
        worst = max(worst, float(np.max(np.abs(residual), initial=0.0)))
    return worst


# ----------------------------
# Reduced vector field
# ----------------------------

def _solve_reduced(
        *,
        value: float,
        grad: np.ndarray,
        hess: np.ndarray,
        v: np.ndarray,
        w: np.ndarray,
        curv: np.ndarray,
        ups: np.ndarray,
        structure: np.ndarray,
) -> np.ndarray:
    m, d = len(v), len(w)
    iq, iv, iw, i_s = slice(0, m), slice(m, 2 * m), slice(2 * m, 2 * m + d), 2 * m + d
    l_q, l_v, l_w, l_s = grad[iq], grad[iv], grad[iw], grad[i_s]

    force_v = (
        l_q
        + np.einsum("aik,k,a->i", curv, v, l_w)
        - np.einsum("aib,b,a->i", ups, w, l_w)
        + l_s * l_v
    )
    force_w = (
        np.einsum("bia,i,b->a", ups, v, l_w)
        - np.einsum("bac,c,b->a", structure, w, l_w)
        + l_s * l_w
    )
    rhs = np.concatenate([
        force_v - hess[iv, iq] @ v - hess[iv, i_s] * value,
        force_w - hess[iw, iq] @ v - hess[iw, i_s] * value,
    ])
    velocity_block = slice(m, 2 * m + d)
    return nx.lu_solve(hess[velocity_block, velocity_block], rhs)


def _lph_field(chart: BundleChart, y: np.ndarray, l_jet: tuple, t: float | None) -> np.ndarray:
    m, d = chart.base_dim, chart.fiber_dim
    q_base, v, w = y[:m], y[m : 2 * m], y[2 * m : 2 * m + d]
    value, grad, hess = l_jet
    try:
        rates = _solve_reduced(
            value=value,
            grad=grad,
            hess=hess,
            v=v,
            w=w,
            curv=curvature(chart, q_base),
            ups=upsilon(chart, chart.identity_point(q_base)),
            structure=chart.algebra.structure_constants,
        )
    except SingularMatrix as e:
        raise NonGRegularAtState(f"reduced velocity Hessian is singular ({e})", time=t, state=y) from e
    return np.concatenate([v, rates, [value]])


def lph_rhs(l: ReducedLagrangian, chart: BundleChart, state, *, t: float | None = None) -> np.ndarray:
    """(q̇, v̇, ẇ, ṡ) at a reduced state vector (q^i, v, w, s)."""
    y = np.asarray(state, dtype=float)
    return _lph_field(chart, y, l.jet(y), t)


def euler_poincare_herglotz_rhs(
        l: Callable[[np.ndarray, object], object],
        spec: LieAlgebraSpec,
        state,
        *,
        t: float | None = None,
) -> np.ndarray:
    """(ẇ, ṡ) for Q = G: the reduced field with an empty base."""
    d = spec.dim
    y = np.asarray(state, dtype=float)
    value, grad, hess = nx.eval_jet2(lambda z: l(z[:d], z[d]), y)
    try:
        rates = _solve_reduced(
            value=value,
            grad=grad,
            hess=hess,
            v=np.zeros(0),
            w=y[:d],
            curv=np.zeros((d, 0, 0)),
            ups=np.zeros((d, 0, d)),
            structure=spec.structure_constants,
        )
    except SingularMatrix as e:
        raise NonGRegularAtState(f"reduced velocity Hessian is singular ({e})", time=t, state=y) from e
    return np.concatenate([rates, [value]])


# ----------------------------
# Trajectories
# ----------------------------

def reduced_energy(l: ReducedLagrangian, state) -> float:
    """v·∂l/∂v + w·∂l/∂w − l."""
    y = np.asarray(state, dtype=float)
    m, d = l.base_dim, l.fiber_dim
    value, grad, _ = l.jet(y)
    velocities = slice(m, 2 * m + d)
    return float(np.dot(y[velocities], grad[velocities]) - value)


def reduced_diagnostics(
        l: ReducedLagrangian,
        times: np.ndarray,
        values: np.ndarray,
        *,
        jets: list[tuple] | None = None,
) -> dict[str, np.ndarray]:
    m, d = l.base_dim, l.fiber_dim
    velocities = slice(m, 2 * m + d)
    if jets is None:
        jets = [l.jet(y) for y in values]
    return dissipation_diagnostics(
        times=times,
        energies=np.array([np.dot(y[velocities], g[velocities]) - value for y, (value, g, _) in zip(values, jets)]),
        dlds=np.array([g[-1] for _, g, _ in jets]),
        lagrangians=np.array([value for value, _, _ in jets]),
        actions=values[:, -1],
    )


def integrate_reduced(
        l: ReducedLagrangian,
        chart: BundleChart,
        initial: ReducedState,
        t1: float,
        h: float,
        *,
        t0: float = 0.0,
) -> Trajectory:
    m, d = chart.base_dim, chart.fiber_dim
    knot_jets = nx.KnotMemo(lambda t, y: l.jet(y))
    problem = nx.OdeProblem(dimension=l.size, rhs=lambda t, y: _lph_field(chart, y, knot_jets(t, y), t))
    times = nx.time_grid(t0, t1, h)
    logger.info("Integrating reduced dynamics: %d steps of %.3g", len(times) - 1, h)
    start = time.perf_counter()
    values = nx.rk4_on_grid(problem, initial.to_vector(), times, on_knot=knot_jets.record)
    logger.info("Reduced route finished in %.2fs", time.perf_counter() - start)
    return Trajectory(
        times=times,
        values=values,
        columns=quasi_columns(m, m, d),
        diagnostics=reduced_diagnostics(l, times, values, jets=knot_jets.values),
    )


def full_to_quasi(full: Trajectory, chart: BundleChart) -> Trajectory:
    """Natural-coordinate full trajectory re-expressed as (q, v, w, s)."""
    m, d = chart.base_dim, chart.fiber_dim
    rows = [to_full(chart, NaturalState.from_vector(y)).to_vector() for y in full.values]
    return Trajectory(
        times=full.times,
        values=np.array(rows).reshape(len(rows), 2 * (m + d) + 1),
        columns=quasi_columns(m + d, m, d),
        diagnostics=dict(full.diagnostics),
    )


def project_full_trajectory(full: Trajectory, chart: BundleChart) -> Trajectory:
    """π applied knot by knot: drop the fibre coordinates of the quasi-velocity view."""
    m, d = chart.base_dim, chart.fiber_dim
    quasi = full_to_quasi(full, chart)
    keep = np.r_[0:m, m + d : 2 * (m + d) + 1]
    return Trajectory(
        times=full.times,
        values=quasi.values[:, keep],
        columns=quasi_columns(m, m, d),
        diagnostics=dict(full.diagnostics),
    )
