import numpy as np
import pytest

from ellipticyb.bases import FiniteRep, sample_points
from ellipticyb.fusion import fuse_double, fusion_shift
from ellipticyb.reduction import (
    compare_up_to_scalar,
    finite_rll_residual,
    fused_rll_residual,
    half_lattice_residual,
    operator_rll_residual,
    reduce_both_spaces,
    reduce_first_space,
    two_dim_reduction_worked,
)
from ellipticyb.sklyanin import NotInvariantError

U, V, G = 0.31 + 0.07j, -0.12 + 0.04j, 0.3 + 0.17j
Z = sample_points(4, 50)


def test_worked_two_dim_steps(params):
    out = two_dim_reduction_worked(params, U, G)
    for key in ("generating_function", "M2_eta", "theta_product_identity", "AB_expansion",
                "reduction_formula", "sigma3_scalar"):
        assert out[key] < 1e-10, key
    assert out["abcd_matrix"] < 1e-8
    assert out["lax_identification"] < 1e-8


@pytest.mark.parametrize("rep", [(1, 0), (0, 1), (1, 1), (2, 0)])
def test_reduction_matches_fusion(params, rep):
    r = FiniteRep(*rep)
    red = reduce_first_space(params, U, r, G)
    fus = fuse_double(params, U + fusion_shift(params, r), G, *rep, seed=7)
    resid, scalar = compare_up_to_scalar(red.coefficients(Z), fus.operator.coefficients(Z))
    assert resid < 1e-7
    assert np.isfinite(scalar) and scalar != 0


def test_reduced_operator_shapes(params):
    red = reduce_first_space(params, U, FiniteRep(1, 1), G)
    co = red.coefficients(Z)
    assert all(v.shape == (len(Z), 4, 4) for v in co.values())
    assert red.fit_residual < 1e-8
    assert set(red.pair_form(Z)) == set(co)


def test_trivial_rep_is_scalar(params):
    co = reduce_first_space(params, U, FiniteRep(0, 0), G).coefficients(Z)
    assert set(co) == {(0, 0, 0)}
    v = co[(0, 0, 0)][:, 0, 0]
    assert np.max(np.abs(v - v[0])) < 1e-10 * abs(v[0])
    assert reduce_both_spaces(params, U, FiniteRep(0, 0), FiniteRep(0, 0)).matrix.shape == (1, 1)


def test_fit_tolerance_enforced(params):
    with pytest.raises(NotInvariantError):
        reduce_first_space(params, U, FiniteRep(1, 0), G, tol=0.0).coefficients(Z)
    with pytest.raises(NotInvariantError):
        reduce_both_spaces(params, U, FiniteRep(1, 0), FiniteRep(1, 0), tol=0.0)


def test_both_spaces_dimension(params):
    out = reduce_both_spaces(params, U, FiniteRep(1, 0), FiniteRep(0, 1))
    assert out.matrix.shape == (4, 4) and out.pair_matrix.shape == (4, 4)
    assert out.fit_residual < 1e-8


@pytest.mark.parametrize("rep1,rep2", [((1, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 1), (0, 1))])
@pytest.mark.parametrize("kind", ["modified", "tilde"])
def test_finite_rll(params, rep1, rep2, kind):
    assert finite_rll_residual(params, U, V, FiniteRep(*rep1), FiniteRep(*rep2), kind) < 1e-8


@pytest.mark.parametrize("aux,rep1,rep2", [((1, 0), (1, 0), (0, 1)), ((0, 1), (1, 0), (1, 0))])
def test_fused_rll(params, aux, rep1, rep2):
    assert fused_rll_residual(params, U, V, FiniteRep(*aux), FiniteRep(*rep1), FiniteRep(*rep2)) < 1e-8


@pytest.mark.parametrize("rep,kind", [((1, 0), "modified"), ((0, 1), "tilde")])
def test_operator_rll(params, points, test_functions, rep, kind):
    r = operator_rll_residual(params, U, FiniteRep(*rep), G, kind, test_functions[1:4], points[:4])
    assert r < 1e-8


@pytest.mark.parametrize("rep", [(1, 0), (0, 1)])
def test_half_lattice_relation(params, rep):
    assert half_lattice_residual(params, U, FiniteRep(*rep), G) < 1e-10


def test_reduced_matrix_depends_on_argument(params):
    a = reduce_both_spaces(params, U, FiniteRep(1, 0), FiniteRep(1, 0)).matrix
    b = reduce_both_spaces(params, U + 0.1, FiniteRep(1, 0), FiniteRep(1, 0)).matrix
    assert not np.allclose(a / a[0, 0], b / b[0, 0])
