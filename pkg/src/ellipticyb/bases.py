"""Theta-function bases of finite-dimensional representations and least-squares fits."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import Callable, List

import numpy as np

from .core import ModularParams, elliptic_gamma, r_const, theta

__all__ = [
    "FiniteRep",
    "BasisSet",
    "FitResult",
    "IllConditionedError",
    "sample_points",
    "fit_points",
    "phi_basis",
    "psi_basis",
    "theta2n_basis",
    "generating_function",
    "generating_function_product",
    "fit_in_basis",
    "interbasis_matrix",
    "kernel_coefficients",
]

MEMBERSHIP_TOL = 1e-8
COND_LIMIT = 1e10


class IllConditionedError(np.linalg.LinAlgError):
    """Raised when a sampled basis matrix is too ill-conditioned to trust a fit."""


@dataclass(frozen=True)
class FiniteRep:
    """Finite-dimensional representation label.

    ``g = half/2 + (n+1) eta + (m+1) tau/2``; the dimension is ``(n+1)(m+1)``.
    """

    n: int
    m: int
    half: bool = False

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("n and m must be non-negative")

    @property
    def dim(self) -> int:
        return (self.n + 1) * (self.m + 1)

    def spin(self, params: ModularParams) -> complex:
        return 0.5 * self.half + (self.n + 1) * params.eta + (self.m + 1) * params.tau / 2

    def indices(self):
        return [(j, l) for j in range(self.n + 1) for l in range(self.m + 1)]


@dataclass
class BasisSet:
    functions: List[Callable]
    labels: list
    kind: str

    def __len__(self):
        return len(self.functions)

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.stack([f(z) for f in self.functions], axis=-1)


def sample_points(count: int, seed: int = 0, re=(0.05, 0.45), im=(-0.1, 0.1)) -> np.ndarray:
    """Seeded random points in the default rectangle ``Re in re``, ``Im in im``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(*re, count) + 1j * rng.uniform(*im, count)


FIT_RE = (0.02, 0.48)
FIT_IM = (-0.35, 0.35)


def fit_points(dim: int, seed: int = 0) -> np.ndarray:
    """Sample points for basis fits: three per unknown over a taller rectangle.

    Theta functions of modulus ``eta`` are nearly degenerate on thin strips, so
    fits use ``|Im z| <= 0.35`` instead of the default evaluation rectangle.
    """
    return sample_points(3 * dim + 2, seed, FIT_RE, FIT_IM)


def _swap34(a: int, half: bool) -> int:
    return {3: 4, 4: 3}[a] if half else a


def phi_basis(params: ModularParams, rep: FiniteRep) -> BasisSet:
    """Monomials ``th3^j th4^(n-j)`` in modulus ``tau/2`` times ``th3^l th4^(m-l)`` in modulus ``eta``."""
    t2, e = params.tau / 2, params.eta
    funcs, labels = [], []
    for j, l in rep.indices():
        def f(z, j=j, l=l):
            a3, a4 = theta(3, z, t2), theta(4, z, t2)
            b3, b4 = theta(3, z, e), theta(4, z, e)
            return a3**j * a4 ** (rep.n - j) * b3**l * b4 ** (rep.m - l)
        funcs.append(f)
        labels.append((j, l))
    return BasisSet(funcs, labels, "phi")


def _sym_product(z, count, ntheta, shift, modulus):
    """Sum over placements of ``ntheta`` copies of theta3 among ``count`` shifted factors."""
    z = np.asarray(z, dtype=complex)
    args = [z + (count - 1 - 2 * r) * shift for r in range(count)]
    t3 = [theta(3, a, modulus) for a in args]
    t4 = [theta(4, a, modulus) for a in args]
    total = np.zeros(z.shape, dtype=complex)
    for pos in combinations(range(count), ntheta):
        s = set(pos)
        total = total + prod((t3[r] if r in s else t4[r]) for r in range(count))
    return total


def psi_basis(params: ModularParams, rep: FiniteRep) -> BasisSet:
    """Symmetrised products of shifted theta functions; dual to :func:`phi_basis`."""
    funcs, labels = [], []
    for j, l in rep.indices():
        def f(z, j=j, l=l):
            return (_sym_product(z, rep.n, j, params.eta, params.tau / 2)
                    * _sym_product(z, rep.m, l, params.tau / 2, params.eta))
        funcs.append(f)
        labels.append((j, l))
    return BasisSet(funcs, labels, "psi")


def theta2n_basis(params: ModularParams, n: int) -> BasisSet:
    """Basis ``thb3^j thb4^(n-j)`` (modulus ``tau/2``) of even theta functions of order ``2n``."""
    t2 = params.tau / 2
    funcs = [
        (lambda z, j=j: theta(3, z, t2) ** j * theta(4, z, t2) ** (n - j)) for j in range(n + 1)
    ]
    return BasisSet(funcs, list(range(n + 1)), "theta2n")


def generating_function(params: ModularParams, rep: FiniteRep, z, x):
    """``Gamma(+-z +- x + g)`` evaluated through the elliptic gamma function."""
    g = rep.spin(params)
    z, x = np.asarray(z, dtype=complex), np.asarray(x, dtype=complex)
    out = 1
    for s1 in (1, -1):
        for s2 in (1, -1):
            out = out * elliptic_gamma(s1 * z + s2 * x + g, params)
    return out


def generating_function_product(params: ModularParams, rep: FiniteRep, z, x):
    """Closed theta-product form of :func:`generating_function`."""
    n, m = rep.n, rep.m
    tau, eta = params.tau, params.eta
    z, x = np.asarray(z, dtype=complex), np.asarray(x, dtype=complex)
    if rep.half:
        z = z + 0.5
    c = ((-2.0) ** (-m - n) * r_const(tau) ** (2 * n) * r_const(2 * eta) ** (2 * m)
         * np.exp(1j * np.pi * (n * (1 - m * m) * tau / 2 + m * (1 - n * n) * eta)))
    t2 = tau / 2
    out = c * np.ones(np.broadcast(z, x).shape, dtype=complex)
    for r in range(n):
        xs = x + (n - 1 - 2 * r) * eta
        out = out * (theta(3, z, t2) * theta(4, xs, t2) + (-1) ** m * theta(4, z, t2) * theta(3, xs, t2))
    for s in range(m):
        xs = x + (m - 1 - 2 * s) * tau / 2
        out = out * (theta(3, z, eta) * theta(4, xs, eta) + (-1) ** n * theta(4, z, eta) * theta(3, xs, eta))
    return out


@dataclass
class FitResult:
    coefficients: np.ndarray
    residual: float
    condition: float


def fit_in_basis(values, basis: BasisSet, points, tol: float = MEMBERSHIP_TOL) -> FitResult:
    """Least-squares coefficients ``c`` with ``values ~ sum_k c_k basis_k(points)``.

    ``values`` may carry trailing axes; they are fitted column by column.  The
    relative residual is reported and an :class:`IllConditionedError` raised when
    the sampled basis matrix has condition number above ``1e10``.  Membership in
    the span is judged by the caller against ``tol``.
    """
    a = basis.evaluate(points)
    norms = np.linalg.norm(a, axis=0)
    cond = float(np.linalg.cond(a / norms))
    if cond > COND_LIMIT:
        raise IllConditionedError(f"basis matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    v = np.asarray(values, dtype=complex)
    flat = v.reshape(v.shape[0], -1)
    coef, *_ = np.linalg.lstsq(a / norms, flat, rcond=None)
    coef = coef / norms[:, None]
    resid = np.linalg.norm(a @ coef - flat) / max(np.linalg.norm(flat), 1e-300)
    return FitResult(coef.reshape((a.shape[1],) + v.shape[1:]), float(resid), cond)


def interbasis_matrix(params: ModularParams, rep: FiniteRep, seed: int = 0) -> np.ndarray:
    """Matrix ``C`` with ``psi_j = sum_k C[j, k] phi_k``."""
    pts = fit_points(rep.dim, seed)
    phi, psi = phi_basis(params, rep), psi_basis(params, rep)
    fit = fit_in_basis(psi.evaluate(pts), phi, pts)
    if fit.residual > MEMBERSHIP_TOL:
        raise ArithmeticError(f"psi basis not in span of phi basis (residual {fit.residual:.2e})")
    return fit.coefficients.T


def kernel_coefficients(params: ModularParams, rep: FiniteRep, seed: int = 0):
    """Coefficients of the generating function in ``phi(z) (x) phi(x)``.

    Returns ``(K, residual)`` with ``Gamma(+-z+-x+g) = sum_{r,s} K[r,s] phi_r(z) phi_s(x)``.
    The matrix is symmetric.
    """
    phi = phi_basis(params, rep)
    pts = fit_points(rep.dim, seed)
    zz, xx = np.meshgrid(pts, pts, indexing="ij")
    vals = generating_function(params, rep, zz, xx)
    a = phi.evaluate(pts)
    ainv = np.linalg.pinv(a)
    k = ainv @ vals @ ainv.T
    resid = np.linalg.norm(a @ k @ a.T - vals) / np.linalg.norm(vals)
    return k, float(resid)
