import math

import numpy as np
import pytest

from herglotz import numerics as nx
from herglotz.errors import DimensionMismatch, DomainError, InvalidParameter, NonFiniteState, SingularMatrix


# ----------------------------
# Dual numbers
# ----------------------------

def test_jet_of_polynomial_and_sine():
    x, y = 0.7, -1.3
    value, grad, hess = nx.eval_jet2(lambda z: z[0] * z[0] * z[1] + nx.sin(z[0]), [x, y])

    assert value == pytest.approx(x * x * y + math.sin(x), abs=1e-15)
    np.testing.assert_allclose(grad, [2 * x * y + math.cos(x), x * x], atol=1e-14)
    np.testing.assert_allclose(hess, [[2 * y - math.sin(x), 2 * x], [2 * x, 0.0]], atol=1e-14)


def test_jet_through_log_of_exp():
    value, grad, hess = nx.eval_jet2(lambda z: nx.log(nx.exp(z[0]) * z[1]), [0.3, 2.0])

    assert value == pytest.approx(0.3 + math.log(2.0), abs=1e-15)
    np.testing.assert_allclose(grad, [1.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(hess, [[0.0, 0.0], [0.0, -0.25]], atol=1e-15)


def test_jet_of_constant_function():
    value, grad, hess = nx.eval_jet2(lambda z: 3.0, [1.0, 2.0])
    assert value == 3.0
    assert not grad.any() and not hess.any()


def test_quotient_and_power():
    value, grad, hess = nx.eval_jet2(lambda z: 1.0 / z[0] + z[1] ** 3, [2.0, 1.5])

    assert value == pytest.approx(0.5 + 1.5**3)
    np.testing.assert_allclose(grad, [-0.25, 3 * 1.5**2], atol=1e-14)
    np.testing.assert_allclose(hess, [[0.25, 0.0], [0.0, 6 * 1.5]], atol=1e-14)


def test_atan2_value_and_derivatives():
    y, x = 0.4, -0.9
    value, grad, _ = nx.eval_jet2(lambda z: nx.atan2(z[0], z[1]), [y, x])

    r2 = x * x + y * y
    assert value == pytest.approx(math.atan2(y, x), abs=1e-15)
    np.testing.assert_allclose(grad, [x / r2, -y / r2], atol=1e-14)


def test_sqrt_jet():
    value, grad, hess = nx.eval_jet2(lambda z: nx.sqrt(z[0]), [4.0])
    assert value == 2.0
    assert grad[0] == pytest.approx(0.25)
    assert hess[0, 0] == pytest.approx(-1.0 / 32.0)


@pytest.mark.parametrize("fn", [nx.log, nx.sqrt])
def test_domain_errors(fn):
    with pytest.raises(DomainError):
        fn(-1.0)
    with pytest.raises(DomainError):
        nx.eval_jet2(lambda z: fn(z[0]), [-2.0])



def _random_function(rng, n):
    # three random monomials of degree ≤ 3 per variable plus a scaled exponential
    coeffs = rng.normal(size=4).tolist()
    powers = rng.integers(0, 4, size=(3, n)).tolist()
    rates = rng.normal(scale=0.5, size=n).tolist()

    def f(z):
        total = coeffs[3] * nx.exp(sum(rates[i] * z[i] for i in range(n)))
        for c, p in zip(coeffs[:3], powers):
            term = c
            for i in range(n):
                if p[i]:
                    term = term * z[i] ** int(p[i])
            total = total + term
        return total

    return f


def _central_gradient(f, x, h=1e-5):
    eye = np.eye(len(x))
    return np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in eye])


def _central_hessian(f, x, h=1e-4):
    eye = np.eye(len(x))
    n = len(x)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            di, dj = h * eye[i], h * eye[j]
            out[i, j] = (f(x + di + dj) - f(x + di - dj) - f(x - di + dj) + f(x - di - dj)) / (4 * h * h)
    return out


def test_jets_match_central_differences_on_random_functions(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        f = _random_function(rng, n)
        x = rng.uniform(-1.0, 1.0, size=n)

        value, grad, hess = nx.eval_jet2(f, x)

        assert value == pytest.approx(f(x), rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(grad, _central_gradient(f, x), rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(hess, _central_hessian(f, x), rtol=1e-5, atol=1e-5)


def test_linearize_shapes():
    value, jac = nx.linearize(lambda z: nx.asarray([[z[0] * z[1], z[1]], [1.0, z[0]]]), [2.0, 3.0])

    assert value.shape == (2, 2) and jac.shape == (2, 2, 2)
    np.testing.assert_allclose(jac[0, 0], [3.0, 2.0])
    np.testing.assert_allclose(jac[1, 0], [0.0, 0.0])


def test_directional_derivative_matches_exact():
    f = lambda z: np.array([z[0] ** 3, np.sin(z[1])])
    derivative = nx.directional_derivative(f, [1.0, 0.5], [1.0, 2.0])
    np.testing.assert_allclose(derivative, [3.0, 2.0 * math.cos(0.5)], atol=1e-9)


# ----------------------------
# Linear algebra
# ----------------------------

def test_lu_solve_matches_numpy(rng):
    a = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=5)
    np.testing.assert_allclose(nx.lu_solve(a, b), np.linalg.solve(a, b), atol=1e-12)


def test_lu_solve_matrix_right_hand_side(rng):
    a = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    b = rng.normal(size=(4, 3))
    np.testing.assert_allclose(nx.lu_solve(a, b), np.linalg.solve(a, b), atol=1e-12)


def test_lu_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(nx.lu_solve(a, [2.0, 3.0]), [3.0, 2.0])


def test_singular_matrix_is_rejected():
    with pytest.raises(SingularMatrix):
        nx.lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_empty_system():
    assert nx.lu_solve(np.zeros((0, 0)), np.zeros(0)).shape == (0,)


def test_non_square_is_rejected():
    with pytest.raises(DimensionMismatch):
        nx.lu_factor(np.zeros((2, 3)))


def test_lu_solve_differentiates_through_entries():
    # x₀ = 1/z for [[z, 1], [0, 2]] x = (1, 0)
    z = 1.7
    value, grad, hess = nx.eval_jet2(
        lambda v: nx.lu_solve(nx.asarray([[v[0], 1.0], [0.0, 2.0]]), np.array([1.0, 0.0]))[0],
        [z],
    )
    assert value == pytest.approx(1 / z)
    assert grad[0] == pytest.approx(-1 / z**2)
    assert hess[0, 0] == pytest.approx(2 / z**3)


def test_inverse(rng):
    a = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    np.testing.assert_allclose(nx.inverse(a) @ a, np.eye(3), atol=1e-12)


def test_mat_exp_rotation_generator():
    t = 2.5
    generator = np.array([[0.0, -t, 0.0], [t, 0.0, 0.0], [0.0, 0.0, 0.0]])
    expected = np.array([[math.cos(t), -math.sin(t), 0.0], [math.sin(t), math.cos(t), 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(nx.mat_exp(generator), expected, atol=1e-13)


def test_mat_exp_nilpotent_and_diagonal():
    np.testing.assert_allclose(nx.mat_exp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(nx.mat_exp(np.diag([5.0, -3.0])), np.diag([math.exp(5.0), math.exp(-3.0)]), rtol=1e-13)
    np.testing.assert_array_equal(nx.mat_exp(np.zeros((2, 2))), np.eye(2))


def test_mat_exp_identities(rng):
    x = rng.normal(size=(4, 4)) * 0.5
    np.testing.assert_allclose(nx.mat_exp(x) @ nx.mat_exp(-x), np.eye(4), atol=1e-10)
    a, b = np.diag(rng.normal(size=3)), np.diag(rng.normal(size=3))
    np.testing.assert_allclose(nx.mat_exp(a + b), nx.mat_exp(a) @ nx.mat_exp(b), atol=1e-10)


# ----------------------------
# Time stepping
# ----------------------------

def test_time_grid_shortens_the_last_step():
    np.testing.assert_allclose(nx.time_grid(0.0, 1.0, 0.3), [0.0, 0.3, 0.6, 0.9, 1.0])
    grid = nx.time_grid(0.0, 1.0, 0.25)
    assert len(grid) == 5 and grid[-1] == 1.0


def test_time_grid_of_many_small_steps_lands_on_end():
    grid = nx.time_grid(0.0, 2.0, 1e-3)
    assert len(grid) == 2001
    assert grid[-1] == 2.0


@pytest.mark.parametrize("t1, h", [(1.0, 0.0), (1.0, -0.1), (0.0, 0.1)])
def test_time_grid_rejects_bad_input(t1, h):
    with pytest.raises(InvalidParameter):
        nx.time_grid(0.0, t1, h)


def test_rk4_fourth_order_on_exponential_decay():
    problem = nx.OdeProblem(dimension=1, rhs=lambda t, y: -y)

    def error(h):
        return abs(nx.rk4_integrate(problem, [1.0], 0.0, 1.0, h)[-1][1][0] - math.exp(-1.0))

    assert error(0.1) < 1e-6
    assert error(0.1) / error(0.05) > 12


def test_rk4_reports_non_finite_state():
    problem = nx.OdeProblem(dimension=1, rhs=lambda t, y: np.array([np.inf]) if t > 0.25 else -y)
    with pytest.raises(NonFiniteState) as info:
        nx.rk4_on_grid(problem, [1.0], nx.time_grid(0.0, 1.0, 0.1))
    assert info.value.time is not None and info.value.state is not None


def test_rk4_checks_dimensions():
    problem = nx.OdeProblem(dimension=2, rhs=lambda t, y: y)
    with pytest.raises(DimensionMismatch):
        nx.rk4_on_grid(problem, [1.0], nx.time_grid(0.0, 1.0, 0.1))


def test_interpolate_cubic_is_exact_on_cubics():
    times = np.linspace(0.0, 1.0, 11)
    values = np.column_stack([times**3 - 2 * times, times**2])
    out = nx.interpolate_cubic(times, values, 0.37)
    np.testing.assert_allclose(out, [0.37**3 - 0.74, 0.37**2], atol=1e-12)
    np.testing.assert_array_equal(nx.interpolate_cubic(times, values, times[4]), values[4])


def test_cumulative_trapezoid_integrates_linear_exactly():
    times = np.linspace(0.0, 2.0, 9)
    np.testing.assert_allclose(nx.cumulative_trapezoid(times, 3.0 * times), 1.5 * times**2, atol=1e-14)


def test_rk4_tags_failures_inside_the_rhs_with_time_and_state():
    problem = nx.OdeProblem(dimension=1, rhs=lambda t, y: -y if t < 0.32 else nx.log(np.array([-1.0])))
    with pytest.raises(DomainError) as info:
        nx.rk4_on_grid(problem, [1.0], nx.time_grid(0.0, 1.0, 0.1))

    assert info.value.time == pytest.approx(0.35)
    assert info.value.state is not None
    assert "t=0.35" in str(info.value) and "state=[" in str(info.value)


def test_knot_memo_reuses_the_first_stage():
    calls = []

    def decay(t, y):
        calls.append(t)
        return -y

    memo = nx.KnotMemo(decay)
    times = nx.time_grid(0.0, 1.0, 0.25)
    states = nx.rk4_on_grid(nx.OdeProblem(dimension=1, rhs=memo), [1.0], times, on_knot=memo.record)

    # three fresh stages per step, one evaluation per knot
    assert len(calls) == 3 * 4 + 5
    assert len(memo.values) == len(times)
    np.testing.assert_array_equal(np.array(memo.values)[:, 0], -states[:, 0])
    np.testing.assert_array_equal(states, nx.rk4_on_grid(nx.OdeProblem(dimension=1, rhs=decay), [1.0], times))
