"""
Built-in systems: the affine-group example, Kaluza-Klein and dissipative
Wong particles, and a damped oscillator baseline. Each builder validates its
regularity gates and registers closed forms used as independent oracles.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import numerics as nx
from .bundle import BundleChart, to_natural, to_quasi
from .contact import ContactLagrangian
from .entities import FullState, NaturalState, ScenarioName
from .errors import ConfigError, InvalidParameter
from .lie import MatrixGroup, affine_group, rotation_group, translation_group
from .reduction import ReducedLagrangian, invariance_check, reduce_lagrangian
from .samplers import draw_states

COMPATIBILITY_TOLERANCE = 1e-12
INVARIANCE_TOLERANCE = 1e-9
INVARIANCE_SAMPLES = 4
INVARIANCE_SEED = 0


@dataclass(frozen=True, eq=False)
class Scenario:
    name: ScenarioName
    chart: BundleChart
    lagrangian: ContactLagrangian
    default_initial: FullState
    parameters: dict[str, float]
    # (low, high) bounds over the FullState vector, inside every regularity domain
    sample_box: tuple[np.ndarray, np.ndarray]
    closed_forms: dict[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        samples = draw_states(rng=np.random.default_rng(INVARIANCE_SEED), scenario=self, count=INVARIANCE_SAMPLES)
        residual = invariance_check(self.lagrangian, self.chart, [self.natural_initial(), *samples])
        if not residual <= INVARIANCE_TOLERANCE:
            raise InvalidParameter(
                f"{self.name} Lagrangian is not invariant under the group action (residual {residual:.3e})"
            )

    @cached_property
    def reduced_lagrangian(self) -> ReducedLagrangian:
        return reduce_lagrangian(self.lagrangian, self.chart)

    def natural_initial(self) -> NaturalState:
        return to_natural(self.chart, self.default_initial)


def _box(low, high) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(low, dtype=float), np.asarray(high, dtype=float)


def _fill(values: list[float], size: int) -> np.ndarray:
    out = np.zeros(size)
    count = min(size, len(values))
    out[:count] = values[:count]
    return out


# ----------------------------
# Affine group example
# ----------------------------

def affine_scenario(*, q: float = 2.0, gamma: float = 0.1) -> Scenario:
    """L = ½θ̇² + qẋθ̇ + ½ẋ² + ln(e^{−θ}φ̇) − γs on ℝ × Aff(ℝ)."""
    if abs(q * q - 1.0) < COMPATIBILITY_TOLERANCE:
        raise InvalidParameter(f"affine Lagrangian is regular only when q² ≠ 1 (got q={q})")
    coupling = q
    group = affine_group()
    chart = BundleChart(
        base_dim=1,
        group=group,
        gamma=lambda q_base: np.zeros((2, 1)),
        upsilon_closed_form=True,
    )

    def lagrangian(qq, u, s):
        theta = qq[1]
        xdot, thetadot, phidot = u[0], u[1], u[2]
        return (
            0.5 * thetadot * thetadot
            + coupling * xdot * thetadot
            + 0.5 * xdot * xdot
            + nx.log(nx.exp(-theta) * phidot)
            - gamma * s
        )

    def herglotz_display(y, dy):
        # qθ̈ + ẍ = −γ(ẋ + qθ̇), θ̈ + qẍ + 1 = −γ(θ̇ + qẋ), −φ̈/φ̇² = −γ/φ̇
        xdot, thetadot, phidot = y[3], y[4], y[5]
        xddot, thetaddot, phiddot = dy[3], dy[4], dy[5]
        return np.array([
            coupling * thetaddot + xddot + gamma * (xdot + coupling * thetadot),
            thetaddot + coupling * xddot + 1.0 + gamma * (thetadot + coupling * xdot),
            -phiddot / phidot**2 + gamma / phidot,
        ])

    def reduced_rhs(y):
        # ẇ₁ + qẍ = −1 − γ(w₁ + qẋ), qẇ₁ + ẍ = −γ(ẋ + qw₁), ẇ₂ = −w₁w₂ + γw₂
        x, xdot, w1, w2, s = y
        l_value = 0.5 * w1 * w1 + coupling * xdot * w1 + 0.5 * xdot * xdot + np.log(w2) - gamma * s
        mass = np.array([[1.0, coupling], [coupling, 1.0]])
        force = np.array([-gamma * (xdot + coupling * w1), -1.0 - gamma * (w1 + coupling * xdot)])
        xddot, w1dot = np.linalg.solve(mass, force)
        return np.array([xdot, xddot, w1dot, -w1 * w2 + gamma * w2, l_value])

    def hessian(phi, phidot):
        # basis {Ẽ₁, Ẽ₂, X}
        return np.array([
            [1.0 - phi**2 / phidot**2, -phi / phidot**2, coupling],
            [-phi / phidot**2, -1.0 / phidot**2, 0.0],
            [coupling, 0.0, 1.0],
        ])

    return Scenario(
        name=ScenarioName.affine,
        chart=chart,
        lagrangian=ContactLagrangian(fn=lagrangian, dim=3),
        default_initial=FullState(
            q_base=np.array([0.0]),
            q_fiber=np.array([0.0, 0.0]),
            v=np.array([1.0]),
            w=np.array([0.5, 1.0]),
            s=0.0,
        ),
        parameters={"q": q, "gamma": gamma},
        sample_box=_box(
            [-1.0, -1.0, -1.0, -1.0, -1.0, 0.5, -1.0],
            [1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0],
        ),
        closed_forms={
            "herglotz_display": herglotz_display,
            "reduced_rhs": reduced_rhs,
            "hessian": hessian,
            "hessian_det": lambda phidot: (coupling**2 - 1.0) / phidot**2,
            "vertical_det": lambda phidot: -1.0 / phidot**2,
            "vertical_inverse": lambda phi, phidot: np.array([[1.0, -phi], [-phi, phi**2 - phidot**2]]),
            "adjoint": lambda theta, phi: np.array([[1.0, 0.0], [-phi, np.exp(theta)]]),
            "lift_velocity": lambda xdot: np.array([-coupling * xdot, 0.0]),
            "reconstruction_xi": lambda h, xdot, w: np.array([
                w[0] + coupling * xdot,
                -h[1] * w[0] + np.exp(h[0]) * w[1] - coupling * h[1] * xdot,
            ]),
        },
    )


# ----------------------------
# Kaluza-Klein particle on E³ × S¹
# ----------------------------

def symmetric_gauge(field: float) -> Callable[[np.ndarray], np.ndarray]:
    """A = ½b(−x², x¹, 0): uniform curvature b in the (x¹, x²) plane."""
    return lambda x: nx.asarray([-0.5 * field * x[1], 0.5 * field * x[0], 0.0])


def kaluza_klein_scenario(
        *,
        potential: Callable[[np.ndarray], np.ndarray] | None = None,
        field: float = 1.0,
        gamma: float = 0.1,
) -> Scenario:
    """g_Q = δ_ij dx^i dx^j + (A_i dx^i + dθ)², L = ½g_Q(u, u) − γs."""
    a_field = potential if potential is not None else symmetric_gauge(field)
    chart = BundleChart(
        base_dim=3,
        group=translation_group(1),
        gamma=lambda x: nx.asarray(a_field(x)).reshape(1, 3),
        upsilon_closed_form=True,
    )

    def lagrangian(q, u, s):
        a = nx.asarray(a_field(q[:3]))
        xdot = u[:3]
        fiber = a[0] * xdot[0] + a[1] * xdot[1] + a[2] * xdot[2] + u[3]
        return 0.5 * (xdot[0] * xdot[0] + xdot[1] * xdot[1] + xdot[2] * xdot[2]) + 0.5 * fiber * fiber - gamma * s

    closed_forms: dict[str, Callable] = {
        "w": lambda t, w0: w0 * np.exp(-gamma * t),
    }
    if potential is None:
        def reduced_rhs(y):
            # ẍ^m = K_mj ẋ^j w − γẋ^m with K_01 = −K_10 = b, ẇ = −γw
            v, w = y[3:6], y[6]
            xddot = np.array([field * v[1] * w, -field * v[0] * w, 0.0]) - gamma * v
            l_value = 0.5 * (v @ v + w * w) - gamma * y[7]
            return np.concatenate([v, xddot, [-gamma * w, l_value]])

        closed_forms["reduced_rhs"] = reduced_rhs

    return Scenario(
        name=ScenarioName.kaluza_klein,
        chart=chart,
        lagrangian=ContactLagrangian(fn=lagrangian, dim=4),
        default_initial=FullState(
            q_base=np.array([1.0, 0.0, 0.0]),
            q_fiber=np.array([0.0]),
            v=np.array([0.0, 1.0, 0.2]),
            w=np.array([0.5]),
            s=0.0,
        ),
        parameters={"field": field, "gamma": gamma},
        sample_box=_box([-1.0] * 9, [1.0] * 9),
        closed_forms=closed_forms,
    )


# ----------------------------
# Dissipative Wong particle
# ----------------------------

def _check_invariant_metric(h: np.ndarray, structure: np.ndarray):
    # h_bd C^b_ac + h_bc C^b_ad = 0
    residual = np.einsum("bd,bac->acd", h, structure) + np.einsum("bc,bad->acd", h, structure)
    worst = float(np.max(np.abs(residual), initial=0.0))
    if worst > COMPATIBILITY_TOLERANCE:
        raise InvalidParameter(f"fibre metric h is not Ad-invariant (residual {worst:.3e})")


def wong_scenario(
        *,
        metric: Callable[[np.ndarray], np.ndarray] | None = None,
        h: np.ndarray | None = None,
        connection: Callable[[np.ndarray], np.ndarray] | None = None,
        group: MatrixGroup | None = None,
        base_dim: int = 2,
        gamma: float = 0.1,
        coupling: float = 0.3,
        field: float = 0.5,
) -> Scenario:
    """
    Kinetic contact Lagrangian L = ½(g_ij v^i v^j + h_ab w^a w^b) − γs written
    in natural coordinates through the invariant frame.

    The default is a particle on ℝ² with metric diag(1, 1 + (q⁰)²) carrying an
    SO(3) charge, with gauge potential γ_0 = (α, 0, 0), γ_1 = (0, βq⁰, α).
    """
    defaults = metric is None and h is None and connection is None and group is None
    if (metric is None or connection is None) and base_dim != 2:
        raise InvalidParameter("the default metric and connection live on a two-dimensional base")
    group = group if group is not None else rotation_group()
    d = group.dim
    h = np.eye(d) if h is None else np.asarray(h, dtype=float)
    if h.shape != (d, d) or np.max(np.abs(h - h.T)) > COMPATIBILITY_TOLERANCE:
        raise InvalidParameter("fibre metric h must be a symmetric d × d matrix")
    _check_invariant_metric(h, group.algebra.structure_constants)

    if metric is None:
        metric = lambda qb: nx.asarray([[1.0, 0.0], [0.0, 1.0 + qb[0] * qb[0]]])
    if connection is None:
        alpha, beta = coupling, field
        connection = lambda qb: nx.asarray([[alpha, 0.0], [0.0, beta * qb[0]], [0.0, alpha]])

    m = base_dim
    chart = BundleChart(base_dim=m, group=group, gamma=connection, upsilon_closed_form=True)

    def lagrangian(q, u, s):
        v, w = to_quasi(chart, q, u)
        g = nx.asarray(metric(q[:m]))
        return 0.5 * (v @ g @ v) + 0.5 * (w @ h @ w) - gamma * s

    closed_forms: dict[str, Callable] = {}
    if defaults:
        alpha, beta = coupling, field

        def reduced_rhs(y):
            x = y[0]
            v, w, s = y[2:4], y[4:7], y[7]
            g = np.diag([1.0, 1.0 + x * x])
            christoffel = np.array([-x * v[1] ** 2, 2.0 * x * v[0] * v[1]])
            k01 = np.array([0.0, beta + alpha**2, -alpha * beta * x])
            force = (k01 @ w) * np.array([v[1], -v[0]]) - christoffel
            vdot = np.linalg.solve(g, force) - gamma * v
            gauge = np.array([alpha * v[0], beta * x * v[1], alpha * v[1]])
            wdot = np.cross(gauge, w) - gamma * w
            l_value = 0.5 * (v @ g @ v + w @ w) - gamma * s
            return np.concatenate([v, vdot, wdot, [l_value]])

        closed_forms["reduced_rhs"] = reduced_rhs

    return Scenario(
        name=ScenarioName.wong,
        chart=chart,
        lagrangian=ContactLagrangian(fn=lagrangian, dim=m + d),
        default_initial=FullState(
            q_base=_fill([0.5, -0.3], m),
            q_fiber=_fill([0.1, 0.2, -0.1], d),
            v=_fill([0.3, 0.2], m),
            w=_fill([0.4, -0.2, 0.1], d),
            s=0.0,
        ),
        parameters={"gamma": gamma, "coupling": coupling, "field": field},
        sample_box=_box(
            [-1.0] * m + [-0.8] * d + [-1.0] * m + [-1.0] * d + [-1.0],
            [1.0] * m + [0.8] * d + [1.0] * m + [1.0] * d + [1.0],
        ),
        closed_forms=closed_forms,
    )


# ----------------------------
# Damped oscillator
# ----------------------------

def damped_oscillator_scenario(*, gamma: float = 0.1) -> Scenario:
    """L = ½u² − ½q² − γs with the trivial group."""
    chart = BundleChart(base_dim=1, group=translation_group(0), gamma=lambda q_base: np.zeros((0, 1)))

    def lagrangian(q, u, s):
        return 0.5 * u[0] * u[0] - 0.5 * q[0] * q[0] - gamma * s

    return Scenario(
        name=ScenarioName.damped_oscillator,
        chart=chart,
        lagrangian=ContactLagrangian(fn=lagrangian, dim=1),
        default_initial=FullState(
            q_base=np.array([1.0]),
            q_fiber=np.zeros(0),
            v=np.array([0.0]),
            w=np.zeros(0),
            s=0.0,
        ),
        parameters={"gamma": gamma},
        sample_box=_box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
        closed_forms={
            "acceleration": lambda q, u: -q - gamma * u,
            "energy": lambda t, e0: e0 * np.exp(-gamma * t),
        },
    )


# ----------------------------
# Registry
# ----------------------------

SCENARIOS: dict[ScenarioName, Callable[..., Scenario]] = {
    ScenarioName.affine: affine_scenario,
    ScenarioName.kaluza_klein: kaluza_klein_scenario,
    ScenarioName.wong: wong_scenario,
    ScenarioName.damped_oscillator: damped_oscillator_scenario,
}

# numeric parameters addressable from configuration
SCENARIO_PARAMETERS: dict[ScenarioName, tuple[str, ...]] = {
    ScenarioName.affine: ("q", "gamma"),
    ScenarioName.kaluza_klein: ("field", "gamma"),
    ScenarioName.wong: ("gamma", "coupling", "field"),
    ScenarioName.damped_oscillator: ("gamma",),
}


def build_scenario(name: str, parameters: dict[str, float] | None = None) -> Scenario:
    try:
        key = ScenarioName(name)
    except ValueError:
        known = ", ".join(s.value for s in ScenarioName)
        raise ConfigError(f"unknown scenario {name!r} (known: {known})") from None
    parameters = dict(parameters or {})
    unknown = sorted(set(parameters) - set(SCENARIO_PARAMETERS[key]))
    if unknown:
        raise ConfigError(
            f"unknown parameter(s) {', '.join(unknown)} for scenario {key.value} "
            f"(accepted: {', '.join(SCENARIO_PARAMETERS[key])})"
        )
    return SCENARIOS[key](**{k: float(v) for k, v in parameters.items()})
