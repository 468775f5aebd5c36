import numpy as np
import pytest

from ellipticyb.bases import sample_points, theta2n_basis
from ellipticyb.core import theta
from ellipticyb.lax import (
    baxter_R,
    lax_from_matrices,
    lax_L,
    lax_L_factorized,
    light_cone,
    rll_residual,
    rll_residual_numeric,
    sigma3_shift_residual,
    weights,
    ybe_residual,
)
from ellipticyb.sklyanin import generator_S, matrix_rep

from conftest import relerr

U, V, G, ELL = 0.31 + 0.07j, -0.12 + 0.04j, 0.3 + 0.17j, 0.37 + 0.1j
PERM = np.eye(4)[[0, 2, 1, 3]]


@pytest.mark.parametrize("tilde", [False, True])
def test_baxter_ybe(params, tilde):
    us = sample_points(20, 30, re=(-0.5, 0.5), im=(-0.3, 0.3))
    vs = sample_points(20, 31, re=(-0.5, 0.5), im=(-0.3, 0.3))
    assert max(ybe_residual(params, u, v, tilde) for u, v in zip(us, vs)) < 1e-10


@pytest.mark.parametrize("tilde", [False, True])
def test_baxter_r_at_zero_is_twice_the_permutation(params, tilde):
    assert np.allclose(baxter_R(params, 0.0, tilde), 2 * PERM)


def test_spin_half_lax_is_baxter(params):
    mats = [matrix_rep(generator_S(params, a, 0.5), theta2n_basis(params, 1)) for a in range(4)]
    c = theta(1, 2 * params.eta, params.tau)
    assert relerr(lax_from_matrices(weights(params, U), mats), c * baxter_R(params, U)) < 1e-10
    lv = lax_from_matrices(weights(params, V), mats)
    assert rll_residual_numeric(baxter_R(params, U - V), lax_from_matrices(weights(params, U), mats), lv) < 1e-10


@pytest.mark.parametrize("kind,spin", [("plain", ELL), ("modified", G), ("tilde", G)])
def test_factorized_lax(params, points, test_functions, kind, spin):
    u1, u2 = light_cone(params, U, spin, kind)
    assert abs(u1 + u2 - U) < 1e-15
    ref, fac = lax_L(params, U, spin, kind), lax_L_factorized(params, u1, u2, kind)
    for f in test_functions:
        assert relerr(ref.apply(f, points), fac.apply(f, points)) < 1e-10


def test_sigma3_shift(params, points, test_functions):
    u1, u2 = light_cone(params, U, G, "modified")
    assert sigma3_shift_residual(params, u1, u2, test_functions, points) < 1e-10


@pytest.mark.parametrize("kind,spin,twist", [("plain", ELL, False), ("modified", G, True), ("tilde", G, True)])
def test_operator_rll(params, points, test_functions, kind, spin, twist):
    r = baxter_R(params, U - V, kind == "tilde")
    res = rll_residual(params, r, lax_L(params, U, spin, kind), lax_L(params, V, spin, kind),
                       test_functions[:2], points[:5], twist=twist)
    assert res < 1e-9
