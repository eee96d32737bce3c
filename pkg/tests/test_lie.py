import math

import numpy as np
import pytest

from herglotz import numerics as nx
from herglotz.errors import BasisNotClosed, ChartOutOfRange, DimensionMismatch, InvalidParameter
from herglotz.lie import (
    LieAlgebraSpec,
    adjoint_from_matrices,
    adjoint_matrix,
    affine_group,
    bracket,
    dexpinv,
    group_exp,
    inverse,
    left_jacobian_inverse,
    left_multiply,
    rotation_group,
    rotation_log,
    rotation_matrix,
    translation_group,
)


def test_affine_structure_constants_come_from_commutators():
    c = affine_group().algebra.structure_constants
    expected = np.zeros((2, 2, 2))
    expected[1, 0, 1], expected[1, 1, 0] = 1.0, -1.0
    np.testing.assert_array_equal(c, expected)
    np.testing.assert_array_equal(bracket(affine_group().algebra, [1.0, 0.0], [0.0, 1.0]), [0.0, 1.0])


def test_so3_structure_constants_are_levi_civita():
    c = rotation_group().algebra.structure_constants
    assert c[2, 0, 1] == pytest.approx(1.0)
    assert c[0, 1, 2] == pytest.approx(1.0)
    assert c[1, 0, 2] == pytest.approx(-1.0)
    np.testing.assert_allclose(bracket(rotation_group().algebra, [1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]),
                               np.cross([1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]), atol=1e-14)


def test_non_antisymmetric_constants_are_rejected():
    c = np.zeros((2, 2, 2))
    c[1, 0, 1] = 1.0
    with pytest.raises(InvalidParameter):
        LieAlgebraSpec(dim=2, structure_constants=c)


def test_wrong_shape_is_rejected():
    with pytest.raises(DimensionMismatch):
        LieAlgebraSpec(dim=2, structure_constants=np.zeros((3, 3, 3)))


def test_basis_inconsistent_with_constants():
    e1 = np.array([[1.0, 0.0], [0.0, 0.0]])
    e2 = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(BasisNotClosed):
        LieAlgebraSpec.abelian(2, (e1, e2))


def test_basis_that_does_not_close():
    e1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    e2 = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(BasisNotClosed):
        LieAlgebraSpec.from_matrices([e1, e2])


def test_affine_adjoint_fixture(rng):
    group = affine_group()
    for _ in range(20):
        theta, phi = rng.uniform(-2.0, 2.0, size=2)
        g = group.element([theta, phi])
        expected = np.array([[1.0, 0.0], [-phi, math.exp(theta)]])
        np.testing.assert_allclose(adjoint_from_matrices(group.algebra, g), expected, atol=1e-12)
        np.testing.assert_allclose(adjoint_matrix(group, g.coords), expected, atol=1e-12)
    np.testing.assert_array_equal(adjoint_from_matrices(group.algebra, group.identity()), np.eye(2))


def test_so3_adjoint_is_the_rotation(rng):
    group = rotation_group()
    w = rng.uniform(-1.0, 1.0, size=3)
    g = group.element(w)
    np.testing.assert_allclose(adjoint_from_matrices(group.algebra, g), rotation_matrix(w), atol=1e-12)


def test_group_exp_of_one_parameter_subgroup():
    group = affine_group()
    xi = np.array([0.3, -0.7])
    g = group_exp(group, xi)
    np.testing.assert_allclose(g.matrix, nx.mat_exp(group.algebra.matrix(xi)), atol=1e-14)
    # exp of aE₁ + bE₂ is (a, b(e^a − 1)/a)
    np.testing.assert_allclose(g.coords, [0.3, -0.7 * (math.exp(0.3) - 1.0) / 0.3], atol=1e-13)


def test_so3_exponential_coordinates(rng):
    group = rotation_group()
    for _ in range(10):
        xi = rng.uniform(-1.5, 1.5, size=3)
        np.testing.assert_allclose(group_exp(group, xi).coords, xi, atol=1e-12)


def test_rotation_log_inverts_rodrigues():
    for w in ([1e-7, -2e-7, 3e-8], [0.05, 0.02, -0.01], [1.2, -0.4, 0.9]):
        np.testing.assert_allclose(rotation_log(rotation_matrix(np.array(w))), w, atol=1e-13)


def test_rotation_log_rejects_half_turn():
    with pytest.raises(ChartOutOfRange):
        rotation_log(rotation_matrix(np.array([0.0, 0.0, math.pi - 1e-4])))


def test_affine_chart_rejects_non_affine_matrix():
    with pytest.raises(ChartOutOfRange):
        affine_group().from_matrix(np.array([[1.0, 0.0], [0.5, 1.0]]))


def test_left_jacobian_inverse_is_the_fundamental_field(rng):
    group = rotation_group()
    for w in (rng.uniform(-1.0, 1.0, size=3), np.array([1e-3, 2e-3, -1e-3])):
        derivative = nx.jacobian(lambda c: group.compose(c, w), np.zeros(3))
        np.testing.assert_allclose(derivative, left_jacobian_inverse(w), atol=1e-10)


def test_composition_and_inverse(rng):
    group = affine_group()
    g1 = group.element(rng.uniform(-1.0, 1.0, size=2))
    g2 = group.element(rng.uniform(-1.0, 1.0, size=2))
    np.testing.assert_allclose(left_multiply(group, g1, g2).coords, group.compose(g1.coords, g2.coords), atol=1e-14)
    product = left_multiply(group, g1, inverse(group, g1))
    np.testing.assert_allclose(product.coords, [0.0, 0.0], atol=1e-14)


def test_affine_product_example():
    group = affine_group()
    expected = [1.0, 2.0 + 3.0 * math.e]
    np.testing.assert_allclose(group.compose(np.array([1.0, 2.0]), np.array([0.0, 3.0])), expected, atol=1e-14)
    product = left_multiply(group, group.element([1.0, 2.0]), group.element([0.0, 3.0]))
    np.testing.assert_allclose(product.coords, expected, atol=1e-14)


GROUPS = [affine_group, lambda: translation_group(3), rotation_group]


@pytest.mark.parametrize("make_group", GROUPS, ids=["affine", "R3", "SO3"])
def test_adjoint_is_a_homomorphism(make_group, rng):
    group = make_group()
    for _ in range(50):
        # |ω| ≤ 0.8·√3 keeps SO(3) products inside the chart
        g1 = group.element(rng.uniform(-0.8, 0.8, size=group.dim))
        g2 = group.element(rng.uniform(-0.8, 0.8, size=group.dim))
        product = adjoint_from_matrices(group.algebra, left_multiply(group, g1, g2))
        factors = adjoint_from_matrices(group.algebra, g1) @ adjoint_from_matrices(group.algebra, g2)
        np.testing.assert_allclose(product, factors, atol=1e-12)


@pytest.mark.parametrize("make_group", GROUPS, ids=["affine", "R3", "SO3"])
def test_exponentials_of_opposite_elements_cancel(make_group, rng):
    group = make_group()
    for _ in range(10):
        xi = rng.uniform(-1.5, 1.5, size=group.dim)
        product = left_multiply(group, group_exp(group, xi), group_exp(group, -xi))
        np.testing.assert_allclose(product.matrix, group.identity().matrix, atol=1e-12)
        np.testing.assert_allclose(product.coords, np.zeros(group.dim), atol=1e-12)


def test_dexpinv_is_identity_for_abelian_algebras():
    spec = translation_group(2).algebra
    np.testing.assert_array_equal(dexpinv(spec, [0.3, 0.1], [1.0, -2.0]), [1.0, -2.0])


def test_dexpinv_first_terms():
    spec = rotation_group().algebra
    u, xi = np.array([0.1, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    first = np.cross(u, xi)
    expected = xi - 0.5 * first + np.cross(u, first) / 12.0
    np.testing.assert_allclose(dexpinv(spec, u, xi), expected, atol=1e-15)


def test_trivial_group():
    group = translation_group(0)
    assert group.dim == 0
    assert group.identity().coords.shape == (0,)
    assert group_exp(group, np.zeros(0)).coords.shape == (0,)
