"""Reduction of the general R-operator to finite-dimensional representations.

With the first spin on the lattice, ``g1 = g_{n,m}``, the R-operator acting on
the generating function ``Gamma(+-z1 +- z3 + g1)`` becomes

    c * P(z1, z2, z3) * M_2(n eta + m tau/2) * Q(z1, z2, z3) * Phi(z2),

with ``c = 1/Gamma(-u + g1 +- g2)`` and gamma-function ratios ``P``, ``Q``.
``M_2`` is a lattice difference operator in ``z2``, so each of its shifts
contributes a function of ``z1`` and ``z3`` that is fitted in ``phi(z1) phi(z3)``.
Undoing the kernel expansion in ``z3`` leaves the matrix of the operator in the
``phi`` basis of the first space, with difference-operator entries in ``z2``.
Substituting the generating function of a second lattice spin for ``Phi`` gives
numeric matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .bases import (
    MEMBERSHIP_TOL,
    FiniteRep,
    fit_points,
    generating_function,
    interbasis_matrix,
    kernel_coefficients,
    phi_basis,
    sample_points,
)
from .core import ModularParams, elliptic_gamma, r_const, theta
from .diffops import DifferenceOperator, MatrixOperator, memoize_points, residual
from .intertwiner import M_eta_plain, M_lattice, gamma4
from .lax import PAULI, lax_from_matrices, lax_L, lax_L_factorized, weights
from .sklyanin import NotInvariantError, generators, matrix_rep

__all__ = [
    "ReducedROperator",
    "ReducedRMatrix",
    "reduce_first_space",
    "reduce_both_spaces",
    "finite_lax",
    "finite_rll_residual",
    "fused_rll_residual",
    "operator_rll_residual",
    "lax_identification",
    "two_dim_reduction_worked",
    "compare_up_to_scalar",
    "half_lattice_residual",
]


def _c_a(params):
    return np.exp(1j * np.pi * params.eta) / r_const(params.tau)


def _normalisation(params, u, g1, g2):
    return 1 / (elliptic_gamma(-u + g1 + g2, params) * elliptic_gamma(-u + g1 - g2, params))


def _prefactors(params, u, g1, g2):
    """``P(z1, z2, z3)`` and ``Q(z1, y, z3)`` of the reduction formula as callables."""
    s = params.eta + params.tau / 2

    def pre(z1, z2, z3):
        return gamma4(params, z2, z3, -u / 2 + (g1 + g2) / 2) / gamma4(params, z1, z2, -u / 2 - (g1 + g2) / 2 + s)

    def post(z1, y, z3):
        return gamma4(params, z1, y, -u / 2 + (g1 - g2) / 2) / gamma4(params, y, z3, -u / 2 + (g2 - g1) / 2 + s)

    return pre, post


@dataclass
class ReducedROperator:
    """R-operator with a finite-dimensional first space.

    ``operator`` holds ``d x d`` matrices in the ``phi`` basis of ``rep``
    (``R phi_c = sum_r phi_r R[r, c]``), one per shift of the second-space
    variable.  ``fit_residuals`` collects the membership residuals of every fit.
    """

    rep: FiniteRep
    u: complex
    g2: complex
    c: complex
    operator: MatrixOperator
    fit_residuals: list = field(default_factory=list)

    @property
    def fit_residual(self) -> float:
        return max(self.fit_residuals, default=0.0)

    def coefficients(self, z2) -> Dict[tuple, np.ndarray]:
        return self.operator.coefficients(z2)

    def pair_form(self, z2, seed: int = 0) -> Dict[tuple, np.ndarray]:
        """Matrices from ``psi`` inputs to ``phi`` outputs: ``R psi_j = sum_r phi_r [R]_{r j}``."""
        c = interbasis_matrix(self.operator.params, self.rep, seed)
        return {k: v @ c.T for k, v in self.coefficients(z2).items()}


def reduce_first_space(params: ModularParams, u, rep: FiniteRep, g2, seed: int = 7,
                       tol: float = MEMBERSHIP_TOL) -> ReducedROperator:
    """Reduce the first space of ``R12(u | g_{n,m}, g2)`` to the representation ``rep``."""
    g1 = rep.spin(params)
    c = complex(_normalisation(params, u, g1, g2))
    m2 = M_lattice(params, rep.n, rep.m, rep.half)
    pre, post = _prefactors(params, u, g1, g2)
    pts = fit_points(rep.dim, seed)
    amat = phi_basis(params, rep).evaluate(pts)
    ainv = np.linalg.pinv(amat)
    kmat, kres = kernel_coefficients(params, rep, seed)
    kinv = np.linalg.inv(kmat)
    out = ReducedROperator(rep, complex(u), complex(g2), c, None, [kres])
    z1 = pts[:, None, None]
    z3 = pts[None, :, None]

    @memoize_points
    def all_coefficients(z):
        y = z[None, None, :]
        p = pre(z1, y, z3)
        res = {}
        for key, cf in m2.terms.items():
            f = c * p * cf(y) * post(z1, y + params.shift(key), z3)
            x = np.einsum("ra,abk,jb->krj", ainv, f, ainv)
            recon = np.einsum("ar,krj,bj->abk", amat, x, amat)
            r = float(np.linalg.norm(recon - f) / max(np.linalg.norm(f), 1e-300))
            out.fit_residuals.append(r)
            if r > tol:
                raise NotInvariantError(f"reduced operator leaves span of phi (residual {r:.2e})")
            res[key] = x @ kinv
        return res

    out.operator = MatrixOperator(params, rep.dim,
                                  {k: (lambda z, k=k: all_coefficients(z)[k]) for k in m2.terms})
    return out


@dataclass
class ReducedRMatrix:
    """Numeric R-matrix on ``V(rep1) (x) V(rep2)``.

    ``matrix`` is written in ``phi (x) phi`` on both sides; ``pair_matrix`` takes
    ``psi (x) psi`` inputs to ``phi (x) phi`` outputs.
    """

    rep1: FiniteRep
    rep2: FiniteRep
    u: complex
    matrix: np.ndarray
    pair_matrix: np.ndarray
    fit_residual: float


def reduce_both_spaces(params: ModularParams, u, rep1: FiniteRep, rep2: FiniteRep, seed: int = 7,
                       tol: float = MEMBERSHIP_TOL) -> ReducedRMatrix:
    """Reduce both spaces: ``Phi(z2)`` becomes the generating function of ``rep2``."""
    g1, g2 = rep1.spin(params), rep2.spin(params)
    c = _normalisation(params, u, g1, g2)
    m2 = M_lattice(params, rep1.n, rep1.m, rep1.half)
    pre, post = _prefactors(params, u, g1, g2)
    p1, p2 = fit_points(rep1.dim, seed), fit_points(rep2.dim, seed + 1)
    z1 = p1[:, None, None, None]
    z3 = p1[None, :, None, None]
    z2 = p2[None, None, :, None]
    z4 = p2[None, None, None, :]
    total = 0
    for key, cf in m2.terms.items():
        y = z2 + params.shift(key)
        total = total + cf(z2) * post(z1, y, z3) * generating_function(params, rep2, y, z4)
    f = c * pre(z1, z2, z3) * total
    a1 = phi_basis(params, rep1).evaluate(p1)
    a2 = phi_basis(params, rep2).evaluate(p2)
    b1, b2 = np.linalg.pinv(a1), np.linalg.pinv(a2)
    x = np.einsum("ra,jb,sc,kd,abcd->rjsk", b1, b1, b2, b2, f)
    recon = np.einsum("ar,bj,cs,dk,rjsk->abcd", a1, a1, a2, a2, x)
    resid = float(np.linalg.norm(recon - f) / np.linalg.norm(f))
    if resid > tol:
        raise NotInvariantError(f"reduced R-matrix leaves span of phi (x) phi (residual {resid:.2e})")
    k1, _ = kernel_coefficients(params, rep1, seed)
    k2, _ = kernel_coefficients(params, rep2, seed + 1)
    y = np.einsum("rjsk,jq,kp->rsqp", x, np.linalg.inv(k1), np.linalg.inv(k2))
    d = rep1.dim * rep2.dim
    mat = y.reshape(d, d)
    c1 = interbasis_matrix(params, rep1, seed)
    c2 = interbasis_matrix(params, rep2, seed + 1)
    return ReducedRMatrix(rep1, rep2, complex(u), mat, mat @ np.kron(c1, c2).T, resid)


# --- finite Lax operators and RLL ------------------------------------------------------------

def finite_lax(params: ModularParams, rep: FiniteRep, u, kind: str = "modified", seed: int = 0) -> np.ndarray:
    """``sum_a w_a(u) sigma_a (x) S^a`` with generators restricted to ``phi(rep)``; ``2d x 2d``."""
    basis = phi_basis(params, rep)
    mats = [matrix_rep(s, basis, seed) for s in generators(params, rep.spin(params), kind)]
    return lax_from_matrices(weights(params, u, kind == "tilde"), mats)


def _relmax(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300))


def _aux_embed(lax, slot, d1, d2):
    """Lax on ``C^2 (x) V_slot`` embedded into ``C^2 (x) V_1 (x) V_2``."""
    t = lax.reshape(2, lax.shape[0] // 2, 2, lax.shape[0] // 2)
    if slot == 1:
        return np.einsum("aibj,kl->aikbjl", t, np.eye(d2)).reshape(2 * d1 * d2, -1)
    return np.einsum("akbl,ij->aikbjl", t, np.eye(d1)).reshape(2 * d1 * d2, -1)


def finite_rll_residual(params: ModularParams, u, v, rep1: FiniteRep, rep2: FiniteRep,
                        kind: str = "modified", seed: int = 7) -> float:
    """``R12(u-v) L1(u) sigma3 L2(v) = L2(v) sigma3 L1(u) R12(u-v)`` on ``C^2 (x) V1 (x) V2``."""
    d1, d2 = rep1.dim, rep2.dim
    r = np.kron(np.eye(2), reduce_both_spaces(params, u - v, rep1, rep2, seed).matrix)
    l1 = _aux_embed(finite_lax(params, rep1, u, kind), 1, d1, d2)
    l2 = _aux_embed(finite_lax(params, rep2, v, kind), 2, d1, d2)
    s3 = np.kron(PAULI[3], np.eye(d1 * d2))
    return _relmax(r @ l1 @ s3 @ l2, l2 @ s3 @ l1 @ r)


def _first_embed(r, da, d1, d2, slot):
    """``R`` on ``V_a (x) V_slot`` embedded into ``V_a (x) V_1 (x) V_2``."""
    ds = d1 if slot == 1 else d2
    t = r.reshape(da, ds, da, ds)
    if slot == 1:
        out = np.einsum("aibj,kl->aikbjl", t, np.eye(d2))
    else:
        out = np.einsum("akbl,ij->aikbjl", t, np.eye(d1))
    n = da * d1 * d2
    return out.reshape(n, n)


def fused_rll_residual(params: ModularParams, u, v, aux: FiniteRep, rep1: FiniteRep, rep2: FiniteRep,
                       seed: int = 7) -> float:
    """RLL with reduced finite L-operators ``L_i(u) = R_{a i}(u)`` on the auxiliary space ``aux``.

    ``R12(u-v) R_a1(u) R_a2(v) = R_a2(v) R_a1(u) R12(u-v)``.  For ``aux = (1,0)``
    these are the fused modified Lax operators, for ``(0,1)`` the tilded ones.
    """
    da, d1, d2 = aux.dim, rep1.dim, rep2.dim
    r12 = np.kron(np.eye(da), reduce_both_spaces(params, u - v, rep1, rep2, seed).matrix)
    ra1 = _first_embed(reduce_both_spaces(params, u, aux, rep1, seed).matrix, da, d1, d2, 1)
    ra2 = _first_embed(reduce_both_spaces(params, v, aux, rep2, seed).matrix, da, d1, d2, 2)
    return _relmax(r12 @ ra1 @ ra2, ra2 @ ra1 @ r12)


def operator_rll_residual(params: ModularParams, u, rep: FiniteRep, g2, kind: str = "modified",
                          test_functions=(), points=None, seed: int = 7) -> float:
    """RLL with the first space finite and the second generic, on test functions.

    ``R(u) L1(u) sigma3 L2(0) = L2(0) sigma3 L1(u) R(u)`` where ``L1`` is the
    finite Lax operator on ``phi(rep)`` and ``L2`` the difference-operator Lax
    operator of spin ``g2``.
    """
    d = rep.dim
    red = reduce_first_space(params, u, rep, g2, seed)
    r = red.operator.kron(np.eye(2))
    l1 = MatrixOperator.from_numeric(params, finite_lax(params, rep, u, kind))
    l2 = MatrixOperator.from_operator_matrix(lax_L(params, 0.0, g2, kind)).kron(None, np.eye(d))
    s3 = np.kron(PAULI[3], np.eye(d))
    lhs = r @ (l1 @ (s3 @ l2))
    rhs = l2 @ (s3 @ (l1 @ r))
    return max(_relmax(lhs.apply(f, points), rhs.apply(f, points)) for f in test_functions)


# --- cross-checks ---------------------------------------------------------------------------

def compare_up_to_scalar(a: Dict[tuple, np.ndarray], b: Dict[tuple, np.ndarray]):
    """Divide out the ratio at the largest entry of ``b`` and return ``(residual, scalar)``.

    Shift keys present in only one operator must carry negligible coefficients.
    """
    keys = set(a) | set(b)
    zero = lambda k, other: np.zeros_like(other[next(iter(other))])
    av = np.concatenate([np.ravel(a.get(k, zero(k, a))) for k in sorted(keys)])
    bv = np.concatenate([np.ravel(b.get(k, zero(k, b))) for k in sorted(keys)])
    i = int(np.argmax(np.abs(bv)))
    s = av[i] / bv[i]
    return float(np.max(np.abs(av - s * bv)) / np.max(np.abs(av))), complex(s)


def half_lattice_residual(params: ModularParams, u, rep: FiniteRep, g2, points=None, seed: int = 7) -> float:
    """``R(u - 1/2 | g + 1/2, g2) = R(u | g, g2) e^{(1/2) d/dz2}`` for the reduced operators.

    Both sides are written in their own ``phi`` bases; the relation holds
    entrywise with unit scalar.
    """
    z = sample_points(4, seed + 3) if points is None else np.atleast_1d(points)
    whole = FiniteRep(rep.n, rep.m, False)
    half = FiniteRep(rep.n, rep.m, True)
    a = reduce_first_space(params, u, whole, g2, seed).coefficients(z)
    b = reduce_first_space(params, u - 0.5, half, g2, seed).coefficients(z)
    shifted = {(k[0], k[1], k[2] + 1): v for k, v in a.items()}
    keys = set(shifted) | set(b)
    if set(shifted) != set(b):
        return float("inf")
    return max(_relmax(shifted[k], b[k]) for k in keys)


def _lax_coefficients(op_matrix, z, keys):
    n = op_matrix.shape[0]
    out = {}
    for k in keys:
        m = np.zeros((len(z), n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                c = op_matrix[i, j].terms.get(k)
                if c is not None:
                    m[:, i, j] = c(z)
        out[k] = m
    return out


def lax_identification(params: ModularParams, u, g, points=None, seed: int = 7) -> Dict[str, float]:
    """Reduced ``(1,0)`` operator against ``-lambda/2 L(u - tau/2) sigma3``, shift by shift.

    ``lambda = -R(tau)^2 c c_A e^{-2 pi i (u + eta) + pi i tau/2}``.  Returns the
    worst relative entry deviation and the fit residual.
    """
    z = sample_points(5, seed + 4) if points is None else np.atleast_1d(points)
    red = reduce_first_space(params, u, FiniteRep(1, 0), g, seed)
    got = red.coefficients(z)
    lam = -r_const(params.tau) ** 2 * red.c * _c_a(params) * np.exp(-2j * np.pi * (u + params.eta) + 1j * np.pi * params.tau / 2)
    lax = lax_L(params, u - params.tau / 2, g, "modified") @ PAULI[3]
    ref = _lax_coefficients(lax, z, got.keys())
    worst = 0.0
    for k in got:
        worst = max(worst, _relmax(got[k], -0.5 * lam * ref[k]))
    return {"entries": worst, "fit": red.fit_residual, "lambda": complex(lam)}


def two_dim_reduction_worked(params: ModularParams, u, g, seed: int = 7) -> Dict[str, object]:
    """Every intermediate of the two-dimensional reduction with its residual.

    Steps: generating function of ``(1,0)`` as a theta bilinear; ``M_2(eta)``
    against ``c_A`` times the plain lattice operator; expansion of ``A`` and
    ``B`` in ``thb4(z1), thb3(z1)``; the reduction formula against the explicit
    ``A``/``B`` form; the ``a, b, c, d`` operator matrix against the fitted
    reduction; identification with ``L(u - tau/2) sigma3``; the ``sigma3``
    shift scalar.
    """
    e, tau = params.eta, params.tau
    t2, t4 = tau / 2, tau / 4
    bar = lambda a, z: theta(a, z, t2)
    rep = FiniteRep(1, 0)
    g1 = rep.spin(params)
    report: Dict[str, object] = {}
    z = sample_points(6, seed)
    w = sample_points(6, seed + 1)
    x = sample_points(6, seed + 2)

    kappa0 = -0.5 * r_const(tau) ** 2 * np.exp(1j * np.pi * t2)
    gen = generating_function(params, rep, z, w)
    bil = kappa0 * (bar(4, z) * bar(3, w) + bar(3, z) * bar(4, w))
    report["generating_function"] = _relmax(gen, bil)

    f = lambda y: bar(3, y) * np.exp(2j * np.pi * y) + np.cos(2 * np.pi * y)
    m_eta = M_lattice(params, 1, 0)
    report["M2_eta"] = residual(m_eta, M_eta_plain(params).scale(_c_a(params)), f, z)

    um, up = (u - g) / 2, (u + g) / 2
    A = lambda z2, z1: bar(4, -z2 - um - e + t4) * theta(1, z2 + z1 - up + t4, tau) * theta(1, z2 - z1 - up + t4, tau)
    B = lambda z2, z1: -bar(3, -z2 - um - e + t4) * theta(1, z2 + z1 - up + t4, tau) * theta(1, z2 - z1 - up + t4, tau)
    ca = lambda z2: -0.5 * bar(4, -z2 - um - e + t4) * bar(3, z2 - up + t4)
    cb = lambda z2: 0.5 * bar(3, -z2 - um - e + t4) * bar(3, z2 - up + t4)
    cc = lambda z2: 0.5 * bar(4, -z2 - um - e + t4) * bar(4, z2 - up + t4)
    cd = lambda z2: -0.5 * bar(3, -z2 - um - e + t4) * bar(4, z2 - up + t4)
    z2g, z1g = np.meshgrid(z, w, indexing="ij")
    ident = 2 * theta(1, z2g + z1g - up + t4, tau) * theta(1, z2g - z1g - up + t4, tau)
    ident_rhs = bar(3, z1g) * bar(4, z2g - up + t4) - bar(4, z1g) * bar(3, z2g - up + t4)
    report["theta_product_identity"] = _relmax(ident, ident_rhs)
    report["AB_expansion"] = max(
        _relmax(A(z2g, z1g), ca(z2g) * bar(4, z1g) + cc(z2g) * bar(3, z1g)),
        _relmax(B(z2g, z1g), cb(z2g) * bar(4, z1g) + cd(z2g) * bar(3, z1g)),
    )

    c = _normalisation(params, u, g1, g)
    lam = -r_const(tau) ** 2 * c * _c_a(params) * np.exp(-2j * np.pi * (u + e) + 1j * np.pi * t2)
    report["lambda"] = complex(lam)
    pre, post = _prefactors(params, u, g1, g)
    Z1, Z2, Z3 = np.meshgrid(w, z, x, indexing="ij")
    direct = 0
    for key, cf in m_eta.terms.items():
        y = Z2 + params.shift(key)
        direct = direct + cf(Z2) * post(Z1, y, Z3) * f(y)
    direct = c * pre(Z1, Z2, Z3) * direct / kappa0
    gauss = lambda y: np.exp(1j * np.pi * y * y / e)
    explicit = 0
    for front, fn in ((bar(3, Z3), A), (bar(4, Z3), B)):
        explicit = explicit + lam * front / theta(1, 2 * Z2, tau) * gauss(Z2) * (
            fn(Z2, Z1) / gauss(Z2 + e) * f(Z2 + e) - fn(-Z2, Z1) / gauss(Z2 - e) * f(Z2 - e))
    report["reduction_formula"] = _relmax(direct, explicit)

    def entry(coef):
        op = DifferenceOperator(params, {
            (1, 0, 0): lambda y: coef(y) / theta(1, 2 * y, tau),
            (-1, 0, 0): lambda y: -coef(-y) / theta(1, 2 * y, tau),
        }).gaussian_conjugate(1 / e)
        return op.scale(lam)

    from .diffops import OperatorMatrix
    abcd = OperatorMatrix([[entry(ca), entry(cb)], [entry(cc), entry(cd)]])
    red = reduce_first_space(params, u, rep, g, seed)
    got = red.coefficients(z)
    ref = _lax_coefficients(abcd, z, got.keys())
    report["abcd_matrix"] = max(_relmax(got[k], ref[k]) for k in got)
    ident = lax_identification(params, u, g, z, seed)
    report["lax_identification"] = ident["entries"]
    report["fit"] = max(ident["fit"], red.fit_residual)

    u1, u2 = (u + g) / 2, (u - g) / 2
    lhs = lax_L_factorized(params, u1 - t2, u2 - t2, "modified") @ PAULI[3]
    rhs = PAULI[3] @ lax_L_factorized(params, u1, u2, "modified")
    lv, rv = lhs.apply(f, z), rhs.apply(f, z)
    i = np.unravel_index(np.argmax(np.abs(rv)), rv.shape)
    measured = lv[i] / rv[i]
    expected = -np.exp(2j * np.pi * (e - t2 + u1 + u2))
    report["sigma3_scalar"] = float(abs(measured - expected) / abs(expected))
    report["sigma3_operator"] = _relmax(lv, expected * rv)
    return report
