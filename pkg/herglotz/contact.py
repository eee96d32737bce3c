"""
Full contact Lagrangian dynamics on TQ×ℝ in natural coordinates (q, u, s).

The Herglotz vector field is Γ = u ∂/∂q + Γ^α ∂/∂u^α + L ∂/∂s, where Γ^α solves

    W Γ = ∂L/∂q + (∂L/∂s) ∂L/∂u − (∂²L/∂q∂u)ᵀ u − L ∂²L/∂s∂u,

with W = ∂²L/∂u∂u. Along solutions E_L = u·∂L/∂u − L obeys dE_L/dt = (∂L/∂s) E_L.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics as nx
from .entities import NaturalState, RecordField, Trajectory, natural_columns
from .errors import NonRegularLagrangianAtState, SingularMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ContactLagrangian:
    fn: Callable[[np.ndarray, np.ndarray, object], object]
    dim: int

    def __call__(self, q, u, s):
        return self.fn(q, u, s)


@dataclass(frozen=True, eq=False)
class LagrangianJet:
    L: float
    dLdq: np.ndarray
    dLdu: np.ndarray
    dLds: float
    W: np.ndarray
    Mqu: np.ndarray
    msu: np.ndarray
    # full Hessian over z = (q, u, s), kept for the contact-form checks
    hessian: np.ndarray


def jet(lagrangian: ContactLagrangian, q, u, s) -> LagrangianJet:
    n = lagrangian.dim
    z = np.concatenate([np.asarray(q, dtype=float), np.asarray(u, dtype=float), [float(s)]])
    value, grad, hess = nx.eval_jet2(lambda v: lagrangian(v[:n], v[n : 2 * n], v[2 * n]), z)
    return LagrangianJet(
        L=value,
        dLdq=grad[:n],
        dLdu=grad[n : 2 * n],
        dLds=float(grad[2 * n]),
        W=hess[n : 2 * n, n : 2 * n],
        Mqu=hess[:n, n : 2 * n],
        msu=hess[2 * n, n : 2 * n],
        hessian=hess,
    )


def velocity_hessian(lagrangian: ContactLagrangian, q, u, s) -> np.ndarray:
    """W = ∂²L/∂u∂u with only the velocities seeded."""
    q = np.asarray(q, dtype=float)
    _, _, hess = nx.eval_jet2(lambda v: lagrangian(q, v, float(s)), np.asarray(u, dtype=float))
    return hess


def energy(lagrangian: ContactLagrangian, q, u, s) -> float:
    j = jet(lagrangian, q, u, s)
    return float(np.dot(u, j.dLdu) - j.L)


def _forcing(j: LagrangianJet, u: np.ndarray) -> np.ndarray:
    return j.dLdq + j.dLds * j.dLdu - j.Mqu.T @ u - j.L * j.msu


def _herglotz_field(j: LagrangianJet, state: np.ndarray, n: int, t: float | None) -> np.ndarray:
    u = state[n : 2 * n]
    try:
        acceleration = nx.lu_solve(j.W, _forcing(j, u))
    except SingularMatrix as e:
        raise NonRegularLagrangianAtState(f"velocity Hessian is singular ({e})", time=t, state=state) from e
    return np.concatenate([u, acceleration, [j.L]])


def _state_jet(lagrangian: ContactLagrangian, state: np.ndarray) -> LagrangianJet:
    n = lagrangian.dim
    return jet(lagrangian, state[:n], state[n : 2 * n], state[2 * n])


def herglotz_rhs(lagrangian: ContactLagrangian, state, *, t: float | None = None) -> np.ndarray:
    """(q̇, u̇, ṡ) = (u, Γ, L) at a natural-coordinate state vector (q, u, s)."""
    state = np.asarray(state, dtype=float)
    return _herglotz_field(_state_jet(lagrangian, state), state, lagrangian.dim, t)


# ----------------------------
# Trajectory diagnostics
# ----------------------------

def dissipation_diagnostics(
        *,
        times: np.ndarray,
        energies: np.ndarray,
        dlds: np.ndarray,
        lagrangians: np.ndarray,
        actions: np.ndarray,
) -> dict[str, np.ndarray]:
    """E_L, E_L − E_L(0)·exp(∫ ∂L/∂s), and Δs/h − ½(L_n + L_{n+1}) per knot."""
    decay = np.exp(nx.cumulative_trapezoid(times, dlds))
    sdot = np.zeros(len(times))
    sdot[1:] = np.diff(actions) / np.diff(times) - 0.5 * (lagrangians[1:] + lagrangians[:-1])
    return {
        RecordField.ENERGY.value: energies,
        RecordField.DISSIPATION_RESIDUAL.value: energies - energies[0] * decay,
        RecordField.SDOT_RESIDUAL.value: sdot,
    }


def full_diagnostics(
        lagrangian: ContactLagrangian,
        times: np.ndarray,
        values: np.ndarray,
        *,
        jets: list[LagrangianJet] | None = None,
) -> dict[str, np.ndarray]:
    n = lagrangian.dim
    if jets is None:
        jets = [_state_jet(lagrangian, y) for y in values]
    return dissipation_diagnostics(
        times=times,
        energies=np.array([np.dot(y[n : 2 * n], j.dLdu) - j.L for y, j in zip(values, jets)]),
        dlds=np.array([j.dLds for j in jets]),
        lagrangians=np.array([j.L for j in jets]),
        actions=values[:, 2 * n],
    )


def integrate_full(
        lagrangian: ContactLagrangian,
        initial: NaturalState,
        t1: float,
        h: float,
        *,
        t0: float = 0.0,
) -> Trajectory:
    n = lagrangian.dim
    knot_jets = nx.KnotMemo(lambda t, y: _state_jet(lagrangian, y))
    problem = nx.OdeProblem(
        dimension=2 * n + 1,
        rhs=lambda t, y: _herglotz_field(knot_jets(t, y), y, n, t),
    )
    times = nx.time_grid(t0, t1, h)
    logger.info("Integrating full Herglotz dynamics: %d steps of %.3g", len(times) - 1, h)
    start = time.perf_counter()
    values = nx.rk4_on_grid(problem, initial.to_vector(), times, on_knot=knot_jets.record)
    logger.info("Full route finished in %.2fs", time.perf_counter() - start)
    return Trajectory(
        times=times,
        values=values,
        columns=natural_columns(n),
        diagnostics=full_diagnostics(lagrangian, times, values, jets=knot_jets.values),
    )


# ----------------------------
# Contact geometry checks
# ----------------------------

def contact_form_check(lagrangian: ContactLagrangian, q, u, s) -> dict[str, float]:
    """Residuals of i_R η = 1, i_R dη = 0, η(Γ) = −E_L, ℒ_Γ η = (∂L/∂s) η and the Γ solve."""
    n = lagrangian.dim
    q, u = np.asarray(q, dtype=float), np.asarray(u, dtype=float)
    j = jet(lagrangian, q, u, s)
    size = 2 * n + 1

    eta = np.concatenate([-j.dLdu, np.zeros(n), [1.0]])
    grad_lu = j.hessian[n : 2 * n, :]
    e_q = np.eye(n, size)
    d_eta = -(grad_lu.T @ e_q - e_q.T @ grad_lu)

    reeb = np.concatenate([np.zeros(n), -nx.lu_solve(j.W, j.msu), [1.0]])
    gamma = herglotz_rhs(lagrangian, np.concatenate([q, u, [s]]))
    e_l = float(np.dot(u, j.dLdu) - j.L)

    grad_l = np.concatenate([j.dLdq, j.dLdu, [j.dLds]])
    grad_e = grad_lu.T @ u + np.concatenate([np.zeros(n), j.dLdu, [0.0]]) - grad_l
    lie_derivative = gamma @ d_eta - grad_e

    return {
        "i_R eta = 1": abs(float(reeb @ eta) - 1.0),
        "i_R d eta = 0": float(np.max(np.abs(reeb @ d_eta))),
        "eta(Gamma) = -E_L": abs(float(eta @ gamma) + e_l),
        "L_Gamma eta = L_s eta": float(np.max(np.abs(lie_derivative - j.dLds * eta))),
        "W Gamma = forcing": float(np.max(np.abs(j.W @ gamma[n : 2 * n] - _forcing(j, u)), initial=0.0)),
    }


def frame_equation_residual(
        lagrangian: ContactLagrangian,
        q,
        u,
        s,
        frame: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """max_α |Γ(Z_α^V L) − Z_α^C L − (∂L/∂s) Z_α^V L| for a moving frame q ↦ [Z_1 … Z_n]."""
    n = lagrangian.dim
    q, u = np.asarray(q, dtype=float), np.asarray(u, dtype=float)
    if frame is None:
        frame = lambda z: np.eye(n)
    z_frame, dz = nx.linearize(frame, q)
    j = jet(lagrangian, q, u, s)
    gamma = herglotz_rhs(lagrangian, np.concatenate([q, u, [s]]))
    h = j.hessian

    vertical = z_frame.T @ j.dLdu
    # gradient over (q, u, s) of Z_α^V L = Σ_β ∂L/∂u^β Z^β_α(q)
    d_vertical_q = z_frame.T @ h[n : 2 * n, :n] + np.einsum("bak,b->ak", dz, j.dLdu)
    d_vertical_u = z_frame.T @ h[n : 2 * n, n : 2 * n]
    d_vertical_s = z_frame.T @ h[n : 2 * n, 2 * n]
    along_gamma = d_vertical_q @ gamma[:n] + d_vertical_u @ gamma[n : 2 * n] + d_vertical_s * gamma[2 * n]

    complete = z_frame.T @ j.dLdq + np.einsum("bak,k,b->a", dz, u, j.dLdu)
    residual = along_gamma - complete - j.dLds * vertical
    return float(np.max(np.abs(residual), initial=0.0))
