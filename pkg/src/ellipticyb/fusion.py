"""Fusion with auxiliary spinors.

Two constructions are provided.  ``fuse_baxter`` multiplies symbols of Baxter's
R-matrix at staggered spectral parameters and recovers the spin ``n/2`` Lax
operator on even theta functions of order ``2n``.  ``fuse_double`` multiplies
the scalar symbols ``Lambda`` of the twisted modular-double Lax operators and
returns the higher-spin R-operator as a matrix of difference operators over
the ``phi`` basis of the finite-dimensional representation ``(n, m)``.

Polynomial dependence on the spinor ``mu = (1, t)`` is resolved by evaluating
at distinct nodes and solving the Vandermonde system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Dict, List

import numpy as np

from .bases import FiniteRep, MEMBERSHIP_TOL, fit_points, phi_basis, sample_points, theta2n_basis
from .core import ModularParams, r_const, theta
from .diffops import DifferenceOperator, MatrixOperator, memoize_points, multiplication
from .intertwiner import gamma4
from .lax import PAULI, baxter_R, lax_L, lax_L_factorized, rll_residual_numeric, weights
from .sklyanin import NotInvariantError, generator_S, matrix_rep, sklyanin_matrix_residuals

__all__ = [
    "Spinor",
    "baxter_symbol",
    "baxter_symbol_product",
    "baxter_closed_form",
    "junction_residual",
    "r_n",
    "FusedLax",
    "fuse_baxter",
    "fused_lax_checks",
    "lambda_symbol",
    "FusedOperator",
    "fuse_double",
    "fusion_shift",
]


# --- spinors ------------------------------------------------------------------------

@dataclass(frozen=True)
class Spinor:
    """Two-component auxiliary spinor, optionally tagged with the parameter it came from."""

    first: complex
    second: complex
    param: complex | None = None
    kind: str | None = None

    @property
    def components(self) -> np.ndarray:
        return np.array([self.first, self.second], dtype=complex)

    @classmethod
    def lam(cls, params: ModularParams, a, tilde: bool = False) -> "Spinor":
        """``(th4(a), th3(a))`` in modulus ``tau/2`` (``eta`` when ``tilde``)."""
        mod = params.eta if tilde else params.tau / 2
        return cls(complex(theta(4, a, mod)), complex(theta(3, a, mod)), a, "lambda~" if tilde else "lambda")

    @classmethod
    def mu(cls, params: ModularParams, b, tilde: bool = False) -> "Spinor":
        """``(th3(b), th4(b))`` in modulus ``tau/2`` (``eta`` when ``tilde``)."""
        mod = params.eta if tilde else params.tau / 2
        return cls(complex(theta(3, b, mod)), complex(theta(4, b, mod)), b, "mu~" if tilde else "mu")

    def reparametrized(self, params: ModularParams) -> "Spinor":
        """Rebuild from the stored parameter; used to confirm the tag is consistent."""
        if self.kind is None:
            raise ValueError("spinor carries no parametrisation")
        tilde = self.kind.endswith("~")
        build = Spinor.lam if self.kind.startswith("lambda") else Spinor.mu
        return build(params, self.param, tilde)


# --- Baxter symbols ---------------------------------------------------------------

def _bar(params, a, z):
    return theta(a, z, params.tau / 2)


def _identity_symbol(params, mu, n=1):
    mu = np.asarray(mu, dtype=complex)
    return lambda z: (mu[0] * _bar(params, 4, z) + mu[1] * _bar(params, 3, z)) ** n


def baxter_symbol(params: ModularParams, u, z, mu, form: str = "generator") -> np.ndarray:
    """``<lambda(z)| R(u) |mu>`` with ``lambda(z) = (thb4(z), thb3(z))``; shape ``z.shape + (2, 2)``.

    ``form`` selects the definition (``generator``), the spin-1/2 Lax operator
    acting on the identity symbol (``lax``) or the three-matrix factorisation
    (``factorized``).
    """
    z = np.asarray(z, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    e = params.eta
    if form == "generator":
        lam = np.stack([_bar(params, 4, z), _bar(params, 3, z)], axis=-1)
        w = weights(params, u)
        out = 0
        for a in range(4):
            coeff = np.einsum("...i,ij,j->...", lam, PAULI[a], mu)
            out = out + w[a] * coeff[..., None, None] * PAULI[a]
        return out
    if form == "lax":
        op = lax_L(params, u, 0.5, "plain")
        vals = op.apply(_identity_symbol(params, mu), z)
        return np.moveaxis(vals, (0, 1), (-2, -1)) / theta(1, 2 * e, params.tau)
    if form == "factorized":
        h = u / 2
        left = np.array([
            [_bar(params, 3, z - h - e), -_bar(params, 3, z + h + e)],
            [-_bar(params, 4, z - h - e), _bar(params, 4, z + h + e)],
        ])
        ident = _identity_symbol(params, mu)
        mid = np.array([ident(z + e), ident(z - e)])
        right = np.array([
            [_bar(params, 4, z + h), _bar(params, 3, z + h)],
            [_bar(params, 4, z - h), _bar(params, 3, z - h)],
        ])
        prod = np.einsum("ij...,j...,jk...->ik...", left, mid, right)
        prod = prod / (theta(1, 2 * e, params.tau) * theta(1, 2 * z, params.tau))
        return np.moveaxis(prod, (0, 1), (-2, -1))
    raise ValueError(f"unknown symbol form {form!r}")


def baxter_symbol_product(params: ModularParams, u, z, mu, n: int) -> np.ndarray:
    """Ordered product of ``n`` symbols at ``u, u - 2 eta, ..., u - 2(n-1) eta``."""
    out = None
    for k in range(n):
        s = baxter_symbol(params, u - 2 * k * params.eta, z, mu)
        out = s if out is None else out @ s
    return out


def r_n(params: ModularParams, u, n: int) -> complex:
    """``2^{n-1} th1(u) th1(u - 2 eta) ... th1(u - 2(n-2) eta) / th1(2 eta)^n``.

    The telescoping leaves one factor ``2 th1(u - 2k eta)`` per junction, so there
    are ``n - 1`` theta factors.
    """
    t = params.tau
    val = 2.0 ** (n - 1) / theta(1, 2 * params.eta, t) ** n
    for k in range(n - 1):
        val = val * theta(1, u - 2 * k * params.eta, t)
    return complex(val)


def baxter_closed_form(params: ModularParams, u, z, mu, n: int) -> np.ndarray:
    """``r_n(u) L(u/2 + eta, u/2 - n eta)`` applied to ``<thb4, thb3|mu>^n``."""
    e = params.eta
    op = lax_L_factorized(params, u / 2 + e, u / 2 - n * e, "plain")
    vals = op.apply(_identity_symbol(params, mu, n), np.asarray(z, dtype=complex))
    return r_n(params, u, n) * np.moveaxis(vals, (0, 1), (-2, -1))


def junction_residual(params: ModularParams, u, z) -> float:
    """Adjacent lateral matrices multiply to ``2 th1(2z) th1(u) I``."""
    z = np.asarray(z, dtype=complex)
    h = u / 2
    right = np.array([
        [_bar(params, 4, z + h), _bar(params, 3, z + h)],
        [_bar(params, 4, z - h), _bar(params, 3, z - h)],
    ])
    left = np.array([
        [_bar(params, 3, z - h), -_bar(params, 3, z + h)],
        [-_bar(params, 4, z - h), _bar(params, 4, z + h)],
    ])
    prod = np.einsum("ij...,jk...->ik...", right, left)
    target = 2 * theta(1, 2 * z, params.tau) * theta(1, u, params.tau)
    ref = target * np.eye(2)[:, :, None]
    return float(np.max(np.abs(prod - ref.reshape(prod.shape))) / np.max(np.abs(target)))


# --- fused Lax operator -------------------------------------------------------------

def _nodes(count: int, start: float, step: float) -> np.ndarray:
    return start + step * np.arange(count)


@dataclass
class FusedLax:
    """Spin ``n/2`` Lax operator obtained from ``n`` Baxter R-matrices.

    ``matrix`` acts on ``C^2 (x) Theta_2n`` in the basis ``thb3^j thb4^(n-j)``;
    it equals ``r_n(u) L(u + (1-n) eta)``.  ``generators`` are the four quantum
    space matrices with the weights and ``r_n`` divided out.
    """

    n: int
    u: complex
    matrix: np.ndarray
    generators: List[np.ndarray]
    normalisation: complex
    fit_residual: float


def fuse_baxter(params: ModularParams, u, n: int, seed: int = 0) -> FusedLax:
    """Fuse ``n`` Baxter R-matrices and reconstruct the Lax operator from its symbol."""
    if n < 1:
        raise ValueError("n must be positive")
    basis = theta2n_basis(params, n)
    pts = fit_points(n + 1, seed)
    tn = _nodes(n + 1, 0.3, 0.7)
    vals = np.stack([baxter_symbol_product(params, u, pts, (1.0, t), n) for t in tn])  # (t, z, 2, 2)
    coef = np.einsum("kt,tzab->kzab", np.linalg.inv(np.vander(tn, n + 1, increasing=True)), vals)
    a = basis.evaluate(pts)
    ainv = np.linalg.pinv(a)
    mats = np.zeros((2, n + 1, 2, n + 1), dtype=complex)
    worst = 0.0
    for k in range(n + 1):
        img = coef[k] / comb(n, k)  # image of thb4^(n-k) thb3^k, basis index k
        fitted = np.einsum("jz,zab->abj", ainv, img)
        worst = max(worst, float(np.linalg.norm(np.einsum("zj,abj->zab", a, fitted) - img) / np.linalg.norm(img)))
        mats[:, :, :, k] = np.transpose(fitted, (0, 2, 1))
    if worst > MEMBERSHIP_TOL:
        raise NotInvariantError(f"fused symbol leaves Theta_2n (residual {worst:.2e})")
    full = mats.reshape(2 * (n + 1), 2 * (n + 1))
    rn = r_n(params, u, n)
    w = weights(params, u + (1 - n) * params.eta)
    b = mats / rn
    gens = [
        (b[0, :, 0] + b[1, :, 1]) / (2 * w[0]),
        (b[0, :, 1] + b[1, :, 0]) / (2 * w[1]),
        (b[1, :, 0] - b[0, :, 1]) / (2j * w[2]),
        (b[0, :, 0] - b[1, :, 1]) / (2 * w[3]),
    ]
    return FusedLax(n, complex(u), full, gens, rn, worst)


def fused_lax_checks(params: ModularParams, n: int, u=0.23 + 0.11j, v=-0.17 + 0.06j, seed: int = 0) -> Dict[str, float]:
    """Residuals certifying the fused spin ``n/2`` operator.

    ``closed_form``: symbol product against ``r_n L`` on the identity symbol;
    ``sklyanin``: relations among the extracted generators;
    ``matrix_rep``: agreement with the difference-operator generators restricted
    to ``Theta_2n`` up to one global scalar; ``rll``: RLL with Baxter's R.
    """
    z = sample_points(6, seed + 1)
    worst = 0.0
    for t in (0.4, -0.7 + 0.2j, 1.3):
        p = baxter_symbol_product(params, u, z, (1.0, t), n)
        c = baxter_closed_form(params, u, z, (1.0, t), n)
        worst = max(worst, float(np.max(np.abs(p - c)) / np.max(np.abs(c))))
    fl = fuse_baxter(params, u, n, seed)
    sk = float(np.max(sklyanin_matrix_residuals(params, fl.generators)))
    basis = theta2n_basis(params, n)
    ref = [matrix_rep(generator_S(params, a, n / 2), basis, seed) for a in range(4)]
    got = np.stack(fl.generators)
    ref = np.stack(ref)
    i = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    scal = got[i] / ref[i]
    mr = float(np.max(np.abs(got - scal * ref)) / np.max(np.abs(got)))
    fl_v = fuse_baxter(params, v, n, seed)
    rll = rll_residual_numeric(baxter_R(params, u - v), fl.matrix, fl_v.matrix)
    return {"closed_form": worst, "sklyanin": sk, "matrix_rep": mr, "rll": rll,
            "fit": fl.fit_residual, "scalar": complex(scal)}


# --- modular double symbols -----------------------------------------------------------

def _lambda_from_spinors(params, u, g, lam, mu, tilde=False) -> DifferenceOperator:
    """``lam_i (L sigma3)_ij mu_j`` for the modified (or tilded) Lax operator."""
    L = lax_L(params, u, g, "tilde" if tilde else "modified") @ PAULI[3]
    op = None
    for i in range(2):
        for j in range(2):
            if np.ndim(lam[i]) == 0 and np.ndim(mu[j]) == 0:
                term = L[i, j].scale(lam[i] * mu[j])
            else:
                w = lam[i] * mu[j]
                term = DifferenceOperator(params, {k: (lambda z, c=c, w=w: w * c(z)) for k, c in L[i, j].terms.items()})
            op = term if op is None else op + term
    return op


def lambda_symbol(params: ModularParams, u, g, a, b, form: str = "generator", tilde: bool = False) -> DifferenceOperator:
    """Scalar symbol ``Lambda(u, lambda(a), mu(b))`` as a difference operator in ``z``.

    ``generator``: contraction of ``L sigma3`` with the spinors; ``theta``: the
    gathered two-term theta form; ``gamma_factorized``: ``M_z`` of the lattice
    step sandwiched between elliptic gamma multipliers.  With ``tilde`` the roles
    of ``2 eta`` and ``tau`` are exchanged.
    """
    e, t = params.eta, params.tau
    step, mod, key = (t / 2, 2 * e, (0, 1, 0)) if tilde else (e, t, (1, 0, 0))
    u1, u2 = (u + g) / 2, (u - g) / 2
    if form == "generator":
        lam = Spinor.lam(params, a, tilde).components
        mu = Spinor.mu(params, b, tilde).components
        return _lambda_from_spinors(params, u, g, lam, mu, tilde)
    gauss = 2 / t if tilde else 1 / e
    neg = tuple(-k for k in key)
    if form == "theta":
        c = -4 * np.exp(2j * np.pi * (u - g + 2 * e + t))
        th = lambda x: theta(1, x, mod)
        sh = t / 2 + 2 * e if tilde else e + t
        plus = lambda z: (c * th(z - u1 + a) * th(z - u1 - a) * th(z + u2 + sh + b) * th(z + u2 + sh - b)
                          * np.exp(4j * np.pi * z) / th(2 * z))
        minus = lambda z: (-c * th(-z - u1 + a) * th(-z - u1 - a) * th(-z + u2 + sh + b) * th(-z + u2 + sh - b)
                           * np.exp(-4j * np.pi * z) / th(2 * z))
        return DifferenceOperator(params, {key: plus, neg: minus}).gaussian_conjugate(gauss)
    if form == "gamma_factorized":
        big = t + 2 * e
        c = -4 * r_const(mod) ** -4 * np.exp(2j * np.pi * (u + step))
        left = multiplication(params, lambda z: gamma4(params, z, a, u1 + big) * gamma4(params, z, b, step - u2))
        right = multiplication(params, lambda z: gamma4(params, z, a, step - u1) * gamma4(params, z, b, big + u2))
        inv = lambda z: 1 / theta(1, 2 * z, mod)
        mz = DifferenceOperator(params, {key: inv, neg: lambda z: -inv(z)}).gaussian_conjugate(gauss)
        return (left @ mz @ right).scale(c)
    raise ValueError(f"unknown symbol form {form!r}")


# --- fused modular double ------------------------------------------------------------------

def fusion_shift(params: ModularParams, rep: FiniteRep) -> complex:
    """Offset ``d`` with ``R_fus(u + d)`` proportional to the reduced ``R12(u | g_nm, g)``."""
    return rep.spin(params) - 2 * params.eta - params.tau


@dataclass
class FusedOperator:
    """Higher-spin R-operator from fused Lax operators, as a :class:`MatrixOperator` over ``phi``."""

    rep: FiniteRep
    u: complex
    g: complex
    operator: MatrixOperator
    fit_residuals: list = field(default_factory=list)

    @property
    def fit_residual(self) -> float:
        return max(self.fit_residuals, default=0.0)


def fuse_double(params: ModularParams, u, g, n: int, m: int, seed: int = 7) -> FusedOperator:
    """Fuse ``n`` modified and ``m`` tilded twisted Lax operators of spin ``g``.

    The string ``Lambda(u) ... Lambda(u - 2(n-1) eta) Lambda~(u - 2n eta) ...
    Lambda~(u - 2n eta - (m-1) tau)`` is evaluated for spinors ``lambda(a)`` at
    fit points ``a`` and ``mu = (1, t)``, ``mu~ = (1, s)`` at interpolation nodes.
    The coefficient of ``t^j s^l`` divided by binomials is the image of
    ``phi_{j,l}``; fitting it in ``phi(a)`` gives the matrix entries.
    """
    if (n, m) == (0, 0):
        raise ValueError("(n, m) = (0, 0) has nothing to fuse")
    rep = FiniteRep(n, m)
    e, t = params.eta, params.tau
    pts = fit_points(rep.dim, seed)
    a = pts[:, None]
    lam = [theta(4, a, t / 2), theta(3, a, t / 2)]
    lamt = [theta(4, a, e), theta(3, a, e)]
    tn = _nodes(n + 1, 0.3, 0.7)
    sn = _nodes(m + 1, -0.4, 0.6)
    spectral = [(u - 2 * k * e, False) for k in range(n)] + [(u - 2 * n * e - k * t, True) for k in range(m)]
    chains = {}
    for it, tv in enumerate(tn):
        for js, sv in enumerate(sn):
            op = None
            for w, tilde in spectral:
                sym = _lambda_from_spinors(params, w, g, lamt if tilde else lam,
                                           [1.0, sv] if tilde else [1.0, tv], tilde)
                op = sym if op is None else op @ sym
            chains[(it, js)] = op
    keys = sorted(set().union(*(op.terms for op in chains.values())))
    basis = phi_basis(params, rep)
    amat = basis.evaluate(pts)
    ainv = np.linalg.pinv(amat)
    vn_inv = np.linalg.inv(np.vander(tn, n + 1, increasing=True))
    vm_inv = np.linalg.inv(np.vander(sn, m + 1, increasing=True))
    binom = np.array([[comb(n, j) * comb(m, l) for l in range(m + 1)] for j in range(n + 1)])
    result = FusedOperator(rep, complex(u), complex(g), None)

    @memoize_points
    def all_coefficients(z):
        out = {}
        zrow = z[None, :]
        for key in keys:
            v = np.zeros((n + 1, m + 1, len(pts), len(z)), dtype=complex)
            for (it, js), op in chains.items():
                c = op.terms.get(key)
                if c is not None:
                    v[it, js] = c(zrow)
            co = np.einsum("jt,lk,tkaz->jlaz", vn_inv, vm_inv, v) / binom[:, :, None, None]
            co = co.reshape(rep.dim, len(pts), len(z))
            x = np.einsum("ra,caz->zrc", ainv, co)
            recon = np.einsum("ar,zrc->caz", amat, x)
            resid = float(np.linalg.norm(recon - co) / max(np.linalg.norm(co), 1e-300))
            result.fit_residuals.append(resid)
            if resid > MEMBERSHIP_TOL:
                raise NotInvariantError(f"fused symbol not in span of phi (residual {resid:.2e})")
            out[key] = x
        return out

    result.operator = MatrixOperator(params, rep.dim, {k: (lambda z, k=k: all_coefficients(z)[k]) for k in keys})
    return result
