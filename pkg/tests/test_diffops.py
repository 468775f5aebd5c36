import numpy as np
import pytest

from ellipticyb.core import theta
from ellipticyb.diffops import (
    ZERO,
    DifferenceOperator,
    MatrixOperator,
    OperatorMatrix,
    constant,
    multiplication,
    shift_op,
)
from ellipticyb.lax import lax_L
from ellipticyb.sklyanin import generator_S

from conftest import relerr


def f(z):
    return np.sin(2 * np.pi * z) + np.exp(2j * np.pi * z) * 0.3


def test_identity_and_shift(params, points):
    ident = DifferenceOperator.identity(params)
    assert np.allclose(ident.apply(f, points), f(points))
    e = shift_op(params, (1, 0, 0))
    assert np.allclose(e.apply(f, points), f(points + params.eta))


def test_shift_value_encoding(params):
    op = shift_op(params, (2, -1, 1))
    assert op.shift_value((2, -1, 1)) == 2 * params.eta - params.tau / 2 + 0.5


def test_compose_matches_nested_application(params, points):
    a = DifferenceOperator(params, {(1, 0, 0): lambda z: np.cos(z), (0, -1, 0): lambda z: z + 1})
    b = DifferenceOperator(params, {(0, 0, 0): lambda z: z**2, (-1, 0, 0): lambda z: np.exp(z)})
    nested = a.apply(lambda w: b.apply(f, w), points)
    assert relerr((a @ b).apply(f, points), nested) < 1e-14


def test_compose_merges_terms(params):
    up = shift_op(params, (1, 0, 0))
    down = shift_op(params, (-1, 0, 0))
    prod = (up + down) @ (up + down)
    assert sorted(prod.terms) == [(-2, 0, 0), (0, 0, 0), (2, 0, 0)]


def test_compose_with_identity_is_term_identical(params, points):
    a = DifferenceOperator(params, {(1, 0, 0): lambda z: np.cos(z)})
    c = a @ DifferenceOperator.identity(params)
    assert set(c.terms) == set(a.terms)
    assert np.allclose(c.terms[(1, 0, 0)](points), a.terms[(1, 0, 0)](points))


def test_composition_is_associative(params, points):
    a = DifferenceOperator(params, {(1, 0, 0): lambda z: z, (0, 1, 0): lambda z: 1 + 0 * z})
    b = multiplication(params, lambda z: np.exp(z))
    c = shift_op(params, (0, 0, 1), lambda z: z - 2)
    assert relerr(((a @ b) @ c).apply(f, points), (a @ (b @ c)).apply(f, points)) < 1e-14


def test_gaussian_conjugation(params, points):
    c = 1 / params.eta
    op = DifferenceOperator(params, {(1, 0, 0): lambda z: z, (-1, 0, 0): lambda z: 2 + 0 * z})
    g = lambda z: np.exp(1j * np.pi * c * z * z)
    direct = g(points) * op.apply(lambda w: f(w) / g(w), points)
    assert relerr(op.gaussian_conjugate(c).apply(f, points), direct) < 1e-13


def test_apply_on_two_variable_function(params):
    op = shift_op(params, (1, 0, 0), var=1)
    z1, z2 = np.array([0.1, 0.2]), np.array([0.3, 0.05])
    out = op.apply(lambda a, b: a * b, (z1, z2))
    assert np.allclose(out, z1 * (z2 + params.eta))


def test_mixing_variables_rejected(params):
    with pytest.raises(ValueError):
        shift_op(params, (1, 0, 0), var=0) + shift_op(params, (1, 0, 0), var=1)


def test_generator_on_theta_basis(params, points):
    s1 = generator_S(params, 1, 0.5)
    t2 = params.tau / 2
    lhs = s1.apply(lambda z: theta(3, z, t2), points)
    rhs = theta(4, points, t2) * theta(1, 2 * params.eta, params.tau)
    assert relerr(lhs, rhs) < 1e-13


def test_operator_matrix_product(params, points):
    a = OperatorMatrix([[shift_op(params, (1, 0, 0)), constant(params, 2.0)],
                        [constant(params, 0.0), multiplication(params, lambda z: z)]])
    prod = a @ a
    ref = a.apply_vector([lambda z: a.apply_vector([f, f], z)[0], lambda z: a.apply_vector([f, f], z)[1]], points)
    assert relerr(prod.apply_vector([f, f], points), ref) < 1e-14


def test_matrix_operator_agrees_with_operator_matrix(params, points):
    lax = lax_L(params, 0.31 + 0.07j, 0.3 + 0.17j, "modified")
    dense = MatrixOperator.from_operator_matrix(lax)
    ref = lax.apply(f, points)  # (2, 2, N)
    got = dense.apply(f, points)  # (N, 2, 2)
    assert relerr(np.moveaxis(ref, -1, 0), got) < 1e-14
    sq_ref = (lax @ lax).apply(f, points)
    sq = (dense @ dense).apply(f, points)
    assert relerr(np.moveaxis(sq_ref, -1, 0), sq) < 1e-13


def test_matrix_operator_kron_and_numeric(params, points):
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    op = MatrixOperator.from_numeric(params, m)
    assert set(op.terms) == {ZERO}
    big = op.kron(np.eye(3))
    assert big.dim == 6
    assert np.allclose(big.coefficients(points)[ZERO][0], np.kron(np.eye(3), m))
    assert np.allclose((np.eye(2) @ op).coefficients(points)[ZERO][0], m)
