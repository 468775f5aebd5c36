import numpy as np
import pytest

from ellipticyb.bases import (
    FiniteRep,
    IllConditionedError,
    BasisSet,
    fit_in_basis,
    fit_points,
    generating_function,
    generating_function_product,
    interbasis_matrix,
    kernel_coefficients,
    phi_basis,
    psi_basis,
    sample_points,
)
from ellipticyb.core import theta

from conftest import relerr

REPS = [FiniteRep(0, 0), FiniteRep(1, 0), FiniteRep(0, 1), FiniteRep(1, 1), FiniteRep(2, 0), FiniteRep(1, 1, True)]


def test_rep_labels(params):
    rep = FiniteRep(2, 1, True)
    assert rep.dim == 6
    assert rep.spin(params) == 0.5 + 3 * params.eta + params.tau
    with pytest.raises(ValueError):
        FiniteRep(-1, 0)


@pytest.mark.parametrize("rep", REPS, ids=str)
def test_generating_function_product_form(params, rep):
    z = sample_points(5, 1)
    x = sample_points(5, 2)
    zz, xx = np.meshgrid(z, x, indexing="ij")
    assert relerr(generating_function(params, rep, zz, xx), generating_function_product(params, rep, zz, xx)) < 1e-12


@pytest.mark.parametrize("rep", REPS, ids=str)
def test_kernel_expansion_is_symmetric(params, rep):
    k, resid = kernel_coefficients(params, rep)
    assert resid < 1e-10
    assert relerr(k, k.T) < 1e-9


@pytest.mark.parametrize("rep", REPS, ids=str)
def test_psi_in_span_of_phi(params, rep):
    c = interbasis_matrix(params, rep)
    pts = sample_points(7, 9)
    assert relerr(psi_basis(params, rep).evaluate(pts), phi_basis(params, rep).evaluate(pts) @ c.T) < 1e-9


def test_phi_basis_for_two_dimensional_rep(params):
    b = phi_basis(params, FiniteRep(1, 0))
    z = sample_points(4, 0)
    t2 = params.tau / 2
    assert np.allclose(b.evaluate(z), np.stack([theta(4, z, t2), theta(3, z, t2)], axis=-1))


def test_fit_recovers_coefficients(params):
    b = phi_basis(params, FiniteRep(2, 1))
    pts = fit_points(6, 0)
    coef = np.arange(1, 7) * (1 + 0.5j)
    fit = fit_in_basis(b.evaluate(pts) @ coef, b, pts)
    assert fit.residual < 1e-12
    assert np.allclose(fit.coefficients, coef)


def test_fit_flags_non_member(params):
    b = phi_basis(params, FiniteRep(1, 0))
    pts = fit_points(2, 0)
    fit = fit_in_basis(np.exp(2j * np.pi * pts), b, pts)
    assert fit.residual > 1e-3


def test_ill_conditioned_basis(params):
    pts = fit_points(2, 0)
    dup = BasisSet([lambda z: theta(3, z, params.tau / 2)] * 2, [0, 1], "dup")
    with pytest.raises(IllConditionedError):
        fit_in_basis(theta(3, pts, params.tau / 2), dup, pts)
