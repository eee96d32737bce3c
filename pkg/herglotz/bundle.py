"""
The trivialized principal bundle Q = U × G → U with a left action on the
fibre. Frames are handled as coordinate-component matrices whose columns are
the fields; brackets and Υ come from dual-number Jacobians of those matrices.

Index layout: ``curvature[a, i, j] = K^a_ij`` and ``upsilon[b, i, a] = Υ^b_ia``.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics as nx
from .entities import FullState, NaturalState, ReducedState
from .errors import DimensionMismatch
from .lie import GroupElement, LieAlgebraSpec, MatrixGroup, adjoint_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BundleChart:
    base_dim: int
    group: MatrixGroup
    gamma: Callable[[np.ndarray], np.ndarray]
    upsilon_closed_form: bool = False

    @property
    def fiber_dim(self) -> int:
        return self.group.dim

    @property
    def dim(self) -> int:
        return self.base_dim + self.group.dim

    @property
    def algebra(self) -> LieAlgebraSpec:
        return self.group.algebra

    def split(self, q) -> tuple[np.ndarray, np.ndarray]:
        if len(q) != self.dim:
            raise DimensionMismatch(f"configuration has {len(q)} entries, chart has {self.dim}")
        return q[: self.base_dim], q[self.base_dim :]

    def connection(self, q_base) -> np.ndarray:
        out = nx.asarray(self.gamma(q_base))
        return out.reshape(self.fiber_dim, self.base_dim)

    def fundamental_K(self, q) -> np.ndarray:
        _, q_fiber = self.split(q)
        if self.group.fundamental is not None:
            return nx.asarray(self.group.fundamental(q_fiber)).reshape(self.fiber_dim, self.fiber_dim)
        return fundamental_from_action(self, q)

    def adjoint(self, q) -> np.ndarray:
        _, q_fiber = self.split(q)
        return adjoint_matrix(self.group, q_fiber).reshape(self.fiber_dim, self.fiber_dim)

    def identity_point(self, q_base) -> np.ndarray:
        return np.concatenate([np.asarray(q_base), np.zeros(self.fiber_dim)])


@dataclass(frozen=True, eq=False)
class Frames:
    # columns are fields; rows are coordinate components on Q
    X: np.ndarray
    Ehat: np.ndarray
    Etilde: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.hstack([self.X, self.Ehat])


def frame_fields(chart: BundleChart, q) -> Frames:
    m, d = chart.base_dim, chart.fiber_dim
    q_base, _ = chart.split(q)
    k = chart.fundamental_K(q)
    ehat_fiber = k @ chart.adjoint(q)
    x_fiber = -(ehat_fiber @ chart.connection(q_base))
    return Frames(
        X=nx.asarray(np.vstack([np.eye(m), x_fiber]) if m else np.zeros((m + d, 0))),
        Ehat=nx.asarray(np.vstack([np.zeros((m, d)), ehat_fiber])),
        Etilde=nx.asarray(np.vstack([np.zeros((m, d)), k])),
    )


def frame_matrices(chart: BundleChart, q) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate components of X_i and Ê_a = A^b_a K^c_b ∂/∂q^c, as columns."""
    if chart.fiber_dim:
        # raises SingularMatrix on a degenerate K
        nx.lu_factor(nx.value_of(chart.fundamental_K(q)))
    frames = frame_fields(chart, q)
    return frames.X, frames.Ehat


def fundamental_from_action(chart: BundleChart, q) -> np.ndarray:
    """K from d/dt (exp(tE_a)·q) at t = 0, differentiating the chart composition at the identity."""
    _, q_fiber = chart.split(np.asarray(q, dtype=float))
    return nx.jacobian(lambda c: chart.group.compose(c, q_fiber), np.zeros(chart.fiber_dim))


def left_invariant_from_action(chart: BundleChart, q) -> np.ndarray:
    """Fibre components of Ê_a from d/dt (q·exp(tE_a)) at t = 0."""
    _, q_fiber = chart.split(np.asarray(q, dtype=float))
    return nx.jacobian(lambda c: chart.group.compose(q_fiber, c), np.zeros(chart.fiber_dim))


# ----------------------------
# Curvature and Υ
# ----------------------------

def curvature(chart: BundleChart, q_base) -> np.ndarray:
    """K^a_ij = ∂γ^a_j/∂q^i − ∂γ^a_i/∂q^j − C^a_bc γ^b_i γ^c_j."""
    gamma, d_gamma = nx.linearize(chart.connection, q_base)
    c = chart.algebra.structure_constants
    derivative = d_gamma.transpose(0, 2, 1) - d_gamma
    return derivative - np.einsum("abc,bi,cj->aij", c, gamma, gamma)


def upsilon_from_connection(chart: BundleChart, q_base) -> np.ndarray:
    # Υ^b_ia = γ^c_i C^b_ac
    gamma = nx.value_of(chart.connection(q_base))
    return np.einsum("bac,ci->bia", chart.algebra.structure_constants, gamma)


def upsilon(chart: BundleChart, q) -> np.ndarray:
    """Υ^b_ia = Ā^b_c X_i(A^c_a); charts flagged with a closed form use γ·C instead."""
    q = np.asarray(q, dtype=float)
    q_base, _ = chart.split(q)
    if chart.upsilon_closed_form:
        return upsilon_from_connection(chart, q_base)
    return upsilon_from_adjoint(chart, q)


def upsilon_from_adjoint(chart: BundleChart, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    a_value, d_a = nx.linearize(chart.adjoint, q)
    x = nx.value_of(frame_fields(chart, q).X)
    along_x = d_a @ x
    return np.einsum("bc,cai->bia", nx.inverse(a_value), along_x)


# ----------------------------
# Quasi-velocities
# ----------------------------

def from_quasi(chart: BundleChart, q, v, w) -> np.ndarray:
    frames = frame_fields(chart, q)
    return frames.X @ nx.asarray(v) + frames.Ehat @ nx.asarray(w)


def to_quasi(chart: BundleChart, q, u) -> tuple[np.ndarray, np.ndarray]:
    """Solve [X_i | Ê_a]·(v, w) = u."""
    solution = nx.lu_solve(frame_fields(chart, q).matrix, u)
    return solution[: chart.base_dim], solution[chart.base_dim :]


def to_natural(chart: BundleChart, state: FullState) -> NaturalState:
    q = state.q
    return NaturalState(q=q, u=nx.value_of(from_quasi(chart, q, state.v, state.w)), s=float(state.s))


def to_full(chart: BundleChart, state: NaturalState) -> FullState:
    q_base, q_fiber = chart.split(np.asarray(state.q, dtype=float))
    v, w = to_quasi(chart, state.q, state.u)
    return FullState(q_base=q_base, q_fiber=q_fiber, v=v, w=w, s=float(state.s))


def project(chart: BundleChart, state: NaturalState) -> ReducedState:
    return to_full(chart, state).reduced()


# ----------------------------
# Group action on Q and TQ
# ----------------------------

def act(chart: BundleChart, g: GroupElement, q) -> np.ndarray:
    """Left action (q^i, h) ↦ (q^i, g·h) in the trivializing chart."""
    q_base, q_fiber = chart.split(q)
    return nx.asarray(np.concatenate([q_base, chart.group.compose(g.coords, q_fiber)]))


def tangent_action(chart: BundleChart, g: GroupElement, q, u) -> tuple[np.ndarray, np.ndarray]:
    """(Φ_g(q), DΦ_g(q)·u), the push-forward by dual-number Jacobian."""
    q = np.asarray(q, dtype=float)
    moved, jac = nx.linearize(lambda z: act(chart, g, z), q)
    return moved, jac @ np.asarray(u, dtype=float)


# ----------------------------
# Bracket table
# ----------------------------

def _field_jacobian(fn: Callable, q) -> tuple[np.ndarray, np.ndarray]:
    # value (n, p), derivative (n, p, n) with the last index the coordinate
    return nx.linearize(fn, q)


def lie_bracket(y, dy, z, dz) -> np.ndarray:
    """[Y_p, Z_r]^k = ∂_l Z_r^k Y_p^l − ∂_l Y_p^k Z_r^l, indexed [k, p, r]."""
    return np.einsum("krl,lp->kpr", dz, y) - np.einsum("kpl,lr->kpr", dy, z)


def _sup(residual: np.ndarray) -> float:
    return float(np.max(np.abs(residual), initial=0.0))


def bracket_table_check(chart: BundleChart, q) -> dict[str, float]:
    """Largest residual of each of the six bracket relations of the invariant frames."""
    q = np.asarray(q, dtype=float)
    q_base, _ = chart.split(q)
    c = chart.algebra.structure_constants

    x, dx = _field_jacobian(lambda z: frame_fields(chart, z).X, q)
    eh, deh = _field_jacobian(lambda z: frame_fields(chart, z).Ehat, q)
    et, det = _field_jacobian(lambda z: frame_fields(chart, z).Etilde, q)
    k_curv = curvature(chart, q_base)
    ups = upsilon(chart, q)

    residuals = {
        "[Et_a,Et_b] = -C^c_ab Et_c": lie_bracket(et, det, et, det) + np.einsum("cab,kc->kab", c, et),
        "[Eh_a,Eh_b] = C^c_ab Eh_c": lie_bracket(eh, deh, eh, deh) - np.einsum("cab,kc->kab", c, eh),
        "[Et_a,Eh_b] = 0": lie_bracket(et, det, eh, deh),
        "[X_i,Et_a] = 0": lie_bracket(x, dx, et, det),
        "[X_i,X_j] = -K^a_ij Eh_a": lie_bracket(x, dx, x, dx) + np.einsum("aij,ka->kij", k_curv, eh),
        "[X_i,Eh_a] = U^b_ia Eh_b": lie_bracket(x, dx, eh, deh) - np.einsum("bia,kb->kia", ups, eh),
    }
    out = {name: _sup(r) for name, r in residuals.items()}
    logger.debug("Bracket table residuals at q=%s: %s", q, out)
    return out
