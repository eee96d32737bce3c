import numpy as np
import pytest

from herglotz.entities import GroupStepper, RecordField, Route
from herglotz.simulation import simulate


def test_full_route_frame(oscillator):
    result = simulate(scenario=oscillator, route=Route.full, t_end=0.5, dt=0.1)
    assert result.frame.columns == ["t", "q0", "u0", "s", "E_L", "dissipation_residual", "sdot_residual"]
    assert result.frame.height == 6
    assert result.summary["final_time"] == pytest.approx(0.5)
    assert result.summary["max_dissipation_residual"] <= 1e-6


def test_reduced_route_frame(affine):
    result = simulate(scenario=affine, route=Route.reduced, t_end=0.2, dt=0.05)
    assert result.frame.columns == ["t", "q0", "v0", "w0", "w1", "s", "E_L", "dissipation_residual", "sdot_residual"]
    assert "max_dissipation_residual" in result.summary


def test_reconstruct_route_has_state_columns_only(affine):
    result = simulate(scenario=affine, route=Route.reconstruct, t_end=0.2, dt=0.05, stepper=GroupStepper.midpoint)
    assert result.frame.columns == ["t", "q0", "q1", "q2", "v0", "w0", "w1", "s"]
    assert set(result.summary) == {"final_time", "final_action"}


def test_compare_route(wong):
    result = simulate(scenario=wong, route=Route.compare, t_end=0.3, dt=0.02)
    columns = result.frame.columns
    state = ["q0", "q1", "q2", "q3", "q4", "v0", "v1", "w0", "w1", "w2", "s"]
    assert columns == ["t", *state, *(f"full_{c}" for c in state), RecordField.DEVIATION.value]
    assert result.summary["max_deviation"] <= 1e-6
    assert result.summary["final_action"] == pytest.approx(float(result.frame["full_s"][-1]), abs=1e-6)


def test_initial_state_override(oscillator):
    initial = oscillator.default_initial
    moved = type(initial)(q_base=np.array([0.0]), q_fiber=initial.q_fiber, v=np.array([1.0]), w=initial.w, s=0.0)
    result = simulate(scenario=oscillator, route=Route.full, t_end=0.1, dt=0.05, initial=moved)
    assert result.frame["q0"][0] == 0.0
    assert result.frame["u0"][0] == 1.0
