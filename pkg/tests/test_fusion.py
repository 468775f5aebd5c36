import numpy as np
import pytest

from ellipticyb.bases import FiniteRep, sample_points
from ellipticyb.core import theta
from ellipticyb.fusion import (
    Spinor,
    baxter_closed_form,
    baxter_symbol,
    baxter_symbol_product,
    fuse_baxter,
    fuse_double,
    fused_lax_checks,
    fusion_shift,
    junction_residual,
    lambda_symbol,
    r_n,
)

from conftest import relerr

U, G = 0.31 + 0.07j, 0.3 + 0.17j
Z = sample_points(5, 21)
MU = (0.7 + 0.2j, -0.3 + 0.5j)


def test_symbol_forms_agree(params):
    ref = baxter_symbol(params, U, Z, MU, "generator")
    for form in ("lax", "factorized"):
        assert relerr(baxter_symbol(params, U, Z, MU, form), ref) < 1e-12


def test_junction_identity(params):
    assert junction_residual(params, U, Z) < 1e-12


def test_r_n_small_cases(params):
    t, e = params.tau, params.eta
    assert abs(r_n(params, U, 1) - 1 / theta(1, 2 * e, t)) < 1e-14
    assert abs(r_n(params, U, 2) - 2 * theta(1, U, t) / theta(1, 2 * e, t) ** 2) < 1e-14


def test_single_symbol_is_lax_on_identity(params):
    got = baxter_symbol(params, U, Z, MU)
    assert got.shape == (len(Z), 2, 2)
    assert relerr(got, baxter_symbol(params, U, Z, MU, "lax")) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_product_against_closed_form(params, n):
    rng = np.random.default_rng(n)
    for _ in range(3):
        mu = tuple(rng.normal(size=2) + 1j * rng.normal(size=2))
        u = complex(rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.2, 0.2))
        assert relerr(baxter_symbol_product(params, u, Z, mu, n), baxter_closed_form(params, u, Z, mu, n)) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symbol_homogeneity(params, n):
    a = baxter_symbol_product(params, U, Z, (2 * MU[0], 2 * MU[1]), n)
    assert relerr(a, 2**n * baxter_symbol_product(params, U, Z, MU, n)) < 1e-14


@pytest.mark.parametrize("n", [2, 3])
def test_fused_lax(params, n):
    c = fused_lax_checks(params, n)
    assert c["closed_form"] < 1e-9
    assert c["sklyanin"] < 1e-9
    assert c["matrix_rep"] < 1e-8
    assert c["rll"] < 1e-8
    assert c["fit"] < 1e-8


def test_fuse_baxter_shapes(params):
    fl = fuse_baxter(params, U, 2)
    assert fl.matrix.shape == (6, 6)
    assert len(fl.generators) == 4 and fl.generators[0].shape == (3, 3)
    with pytest.raises(ValueError):
        fuse_baxter(params, U, 0)


def test_spinor_components(params):
    a = 0.17 + 0.05j
    lam = Spinor.lam(params, a).components
    assert np.allclose(lam, [theta(4, a, params.tau / 2), theta(3, a, params.tau / 2)])


@pytest.mark.parametrize("form", ["theta", "gamma_factorized"])
@pytest.mark.parametrize("tilde", [False, True])
def test_lambda_forms(params, points, test_functions, form, tilde):
    a, b = 0.17 + 0.05j, -0.08 + 0.11j
    ref = lambda_symbol(params, U, G, a, b, "generator", tilde)
    got = lambda_symbol(params, U, G, a, b, form, tilde)
    for f in test_functions:
        assert relerr(ref.apply(f, points), got.apply(f, points)) < 1e-8


def test_lambda_tilde_is_swapped_plain(params, points, test_functions):
    a, b = 0.17 + 0.05j, -0.08 + 0.11j
    tl = lambda_symbol(params, U, G, a, b, tilde=True)
    sw = lambda_symbol(params.swapped(), U, G, a, b)
    for f in test_functions:
        assert relerr(tl.apply(f, points), sw.apply(f, points)) < 1e-12


def test_unknown_lambda_form(params):
    with pytest.raises(ValueError):
        lambda_symbol(params, U, G, 0.1, 0.2, "star_triangle")


def test_fuse_double_shapes(params):
    fo = fuse_double(params, U, G, 1, 1)
    co = fo.operator.coefficients(Z)
    assert sorted(co) == [(-1, -1, 0), (-1, 1, 0), (1, -1, 0), (1, 1, 0)]
    assert co[(1, 1, 0)].shape == (len(Z), 4, 4)
    assert fo.fit_residual < 1e-8
    with pytest.raises(ValueError):
        fuse_double(params, U, G, 0, 0)


def test_fusion_shift(params):
    rep = FiniteRep(1, 1)
    assert fusion_shift(params, rep) == rep.spin(params) - 2 * params.eta - params.tau
