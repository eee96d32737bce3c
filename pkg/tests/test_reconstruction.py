import dataclasses
import math

import numpy as np
import pytest

from herglotz.bundle import to_natural
from herglotz.contact import integrate_full
from herglotz.entities import GroupStepper
from herglotz.errors import ChartOutOfRange, InvalidParameter
from herglotz.lie import affine_group, group_exp, rotation_group
from herglotz.reconstruction import (
    algebra_velocity,
    blocks_at,
    connection_axioms_check,
    equivariance_check,
    horizontal_lift,
    horizontality_residual,
    lift_velocity,
    reconstruct,
    solve_group_ode,
)
from herglotz.reduction import full_to_quasi, integrate_reduced
from herglotz.samplers import full_state, natural_state


def _affine_natural(affine, rng):
    return natural_state(rng=rng, scenario=affine)()


def test_affine_hessian_in_the_invariant_basis(affine, rng):
    for _ in range(10):
        state = _affine_natural(affine, rng)
        phi, phidot = state.q[2], state.u[2]
        blocks = blocks_at(affine.lagrangian, affine.chart, state.q, state.u, state.s)
        np.testing.assert_allclose(blocks.matrix(), affine.closed_forms["hessian"](phi, phidot), atol=1e-12)
        assert np.linalg.det(blocks.matrix()) == pytest.approx(affine.closed_forms["hessian_det"](phidot), abs=1e-12)
        assert np.linalg.det(blocks.g_ab) == pytest.approx(affine.closed_forms["vertical_det"](phidot), abs=1e-12)
        np.testing.assert_allclose(
            blocks.vertical_inverse(), affine.closed_forms["vertical_inverse"](phi, phidot), atol=1e-12
        )


def test_connection_axioms(symmetric_scenario, rng):
    sample = natural_state(rng=rng, scenario=symmetric_scenario)
    for _ in range(5):
        state = sample()
        residuals = connection_axioms_check(symmetric_scenario.lagrangian, symmetric_scenario.chart, state.q, state.u, state.s)
        assert len(residuals) == 6
        for name, residual in residuals.items():
            assert residual <= 1e-9, name


def test_connection_is_equivariant(symmetric_scenario, rng):
    state = natural_state(rng=rng, scenario=symmetric_scenario)()
    residual = equivariance_check(symmetric_scenario.lagrangian, symmetric_scenario.chart, state.q, state.u, state.s)
    assert residual <= 1e-8


def test_affine_lift_velocity(affine, rng):
    sample = full_state(rng=rng, scenario=affine)
    for _ in range(5):
        state = sample()
        np.testing.assert_allclose(
            lift_velocity(affine.lagrangian, affine.chart, state.q, state.v, state.w, state.s),
            affine.closed_forms["lift_velocity"](state.v[0]),
            atol=1e-12,
        )


def test_affine_algebra_velocity(affine, rng):
    sample = full_state(rng=rng, scenario=affine)
    for _ in range(5):
        state = sample()
        np.testing.assert_allclose(
            algebra_velocity(affine.lagrangian, affine.chart, state.q, state.v, state.w, state.s),
            affine.closed_forms["reconstruction_xi"](state.q_fiber, state.v[0], state.w),
            atol=1e-12,
        )


@pytest.fixture(scope="module")
def affine_reduced(affine):
    return integrate_reduced(affine.reduced_lagrangian, affine.chart, affine.default_initial.reduced(), 1.0, 1e-2)


def test_affine_horizontal_lift(affine, affine_reduced):
    start = dataclasses.replace(affine.default_initial, q_fiber=np.array([0.2, -0.5]))
    lift = horizontal_lift(affine_reduced, affine.chart, affine.lagrangian, start)
    x = lift.column("q0")
    coupling = affine.parameters["q"]

    np.testing.assert_allclose(lift.column("q1"), 0.2 - coupling * (x - x[0]), atol=1e-8)
    np.testing.assert_allclose(lift.column("q2"), -0.5, atol=1e-12)
    assert horizontality_residual(lift, affine.chart, affine.lagrangian) <= 1e-3


def test_lift_rejects_a_start_off_the_reduced_curve(affine, affine_reduced):
    start = dataclasses.replace(affine.default_initial, v=np.array([3.0]))
    with pytest.raises(InvalidParameter):
        horizontal_lift(affine_reduced, affine.chart, affine.lagrangian, start)


# ----------------------------
# Group ODE
# ----------------------------

@pytest.mark.parametrize("stepper", list(GroupStepper))
def test_constant_velocity_gives_one_parameter_subgroup(stepper):
    group = affine_group()
    xi = np.array([0.4, -1.1])
    times = np.linspace(0.0, 2.0, 21)
    curve = solve_group_ode(group, times, np.tile(xi, (len(times), 1)), stepper=stepper)
    for t, g in curve:
        np.testing.assert_allclose(g.coords, group_exp(group, t * xi).coords, atol=1e-12)


def test_zero_velocity_stays_at_identity():
    group = rotation_group()
    times = np.linspace(0.0, 1.0, 11)
    curve = solve_group_ode(group, times, np.zeros((len(times), 3)))
    for _, g in curve:
        np.testing.assert_allclose(g.matrix, np.eye(3), atol=1e-15)


def test_group_curve_leaving_the_chart_reports_where():
    # the second step reaches a rotation by π, outside exponential coordinates
    times = np.array([0.0, 0.5, 1.0])
    xi = np.tile([math.pi, 0.0, 0.0], (len(times), 1))
    with pytest.raises(ChartOutOfRange) as info:
        solve_group_ode(rotation_group(), times, xi, stepper=GroupStepper.midpoint)

    assert info.value.time == 0.5
    np.testing.assert_allclose(info.value.state, [math.pi / 2, 0.0, 0.0], atol=1e-12)
    assert "t=0.5" in str(info.value)


def _so3_error(stepper: GroupStepper, h: float, reference) -> float:
    times = np.arange(0.0, 1.0 + h / 2, h)
    xi = np.column_stack([np.cos(times), np.sin(2 * times), times])
    final = solve_group_ode(rotation_group(), times, xi, stepper=stepper)[-1][1]
    return float(np.max(np.abs(final.matrix - reference)))


@pytest.mark.parametrize("stepper, min_ratio", [(GroupStepper.midpoint, 3.0), (GroupStepper.rkmk4, 10.0)])
def test_group_stepper_orders(stepper, min_ratio):
    times = np.arange(0.0, 1.0 + 1e-4, 2.5e-3)
    xi = np.column_stack([np.cos(times), np.sin(2 * times), times])
    reference = solve_group_ode(rotation_group(), times, xi)[-1][1].matrix

    coarse, fine = _so3_error(stepper, 0.1, reference), _so3_error(stepper, 0.05, reference)
    assert coarse / fine > min_ratio


# ----------------------------
# Reconstruction
# ----------------------------

def test_reconstruction_recovers_the_full_solution(symmetric_scenario):
    scenario = symmetric_scenario
    reduced = integrate_reduced(scenario.reduced_lagrangian, scenario.chart, scenario.default_initial.reduced(), 1.0, 1e-2)
    result = reconstruct(reduced, scenario.chart, scenario.lagrangian, scenario.default_initial)
    full = full_to_quasi(integrate_full(scenario.lagrangian, scenario.natural_initial(), 1.0, 1e-2), scenario.chart)

    assert len(result.group_curve) == len(reduced)
    np.testing.assert_allclose(result.group_curve[0][1].matrix, np.eye(result.group_curve[0][1].matrix.shape[0]))
    assert np.max(np.abs(result.full_trajectory.values - full.values)) <= 1e-6


def test_reconstruction_with_the_trivial_group(oscillator):
    reduced = integrate_reduced(oscillator.reduced_lagrangian, oscillator.chart, oscillator.default_initial.reduced(), 1.0, 1e-2)
    result = reconstruct(reduced, oscillator.chart, oscillator.lagrangian, oscillator.default_initial)
    full = integrate_full(oscillator.lagrangian, to_natural(oscillator.chart, oscillator.default_initial), 1.0, 1e-2)

    np.testing.assert_allclose(result.full_trajectory.values, reduced.values, atol=1e-15)
    np.testing.assert_allclose(result.full_trajectory.values, full.values, atol=1e-12)
