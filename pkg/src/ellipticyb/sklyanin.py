"""Sklyanin algebra generators as difference operators, structure constants, Casimirs."""
from __future__ import annotations

from typing import List

import numpy as np

from .bases import BasisSet, fit_in_basis, fit_points, MEMBERSHIP_TOL
from .core import ModularParams, theta
from .diffops import DifferenceOperator

__all__ = [
    "generator_S",
    "generator_S_modified",
    "generator_S_tilde",
    "generators",
    "structure_constants",
    "j_alpha",
    "j_alpha_tilde",
    "sklyanin_relation_residuals",
    "cross_relation_residuals",
    "casimir_values",
    "casimir_residuals",
    "matrix_rep",
    "sklyanin_matrix_residuals",
    "NotInvariantError",
]

ETA_STEP = (1, 0, 0)
HALF_TAU_STEP = (0, 1, 0)
CYCLIC = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


class NotInvariantError(ArithmeticError):
    """An operator does not preserve the span of a basis."""


def _raw(params, alpha, arg_shift, modulus, step_key, step):
    """``i^{d_{a2}} th_{a+1}(step|mod)/th1(2z|mod) [th_{a+1}(2z+s) e^{step d} - th_{a+1}(-2z+s) e^{-step d}]``."""
    a = alpha + 1
    pref = (1j if alpha == 2 else 1.0) * theta(a, step, modulus)
    neg = tuple(-k for k in step_key)

    def plus(z):
        return pref * theta(a, 2 * z + arg_shift, modulus) / theta(1, 2 * z, modulus)

    def minus(z):
        return -pref * theta(a, -2 * z + arg_shift, modulus) / theta(1, 2 * z, modulus)

    return DifferenceOperator(params, {tuple(step_key): plus, neg: minus})


def generator_S(params: ModularParams, alpha: int, ell: complex) -> DifferenceOperator:
    """Sklyanin generator ``S^alpha`` of spin ``ell`` on functions of ``z``."""
    _check_alpha(alpha)
    return _raw(params, alpha, -2 * params.eta * ell, params.tau, ETA_STEP, params.eta)


def generator_S_modified(params: ModularParams, alpha: int, g: complex) -> DifferenceOperator:
    """Generator of the modular double in the ``g``-parametrisation, Gaussian-conjugated by ``e^{pi i z^2/eta}``."""
    _check_alpha(alpha)
    op = _raw(params, alpha, -g + params.eta, params.tau, ETA_STEP, params.eta)
    return op.gaussian_conjugate(1 / params.eta)


def generator_S_tilde(params: ModularParams, alpha: int, g: complex) -> DifferenceOperator:
    """Companion generator with ``eta -> tau/2`` and ``tau -> 2 eta`` exchanged."""
    _check_alpha(alpha)
    half = params.tau / 2
    op = _raw(params, alpha, -g + half, 2 * params.eta, HALF_TAU_STEP, half)
    return op.gaussian_conjugate(2 / params.tau)


def generators(params, spin, kind: str = "modified") -> List[DifferenceOperator]:
    """All four generators of one kind: ``plain`` (spin ell), ``modified`` or ``tilde`` (spin g)."""
    build = {"plain": generator_S, "modified": generator_S_modified, "tilde": generator_S_tilde}[kind]
    return [build(params, a, spin) for a in range(4)]


def _check_alpha(alpha):
    if alpha not in (0, 1, 2, 3):
        raise ValueError(f"generator index must be 0..3, got {alpha}")


def j_alpha(params: ModularParams, modulus=None, eta=None) -> np.ndarray:
    """``J_a = th_{a+1}(2 eta) th_{a+1}(0) / th_{a+1}(eta)^2`` for ``a = 1, 2, 3`` (index 0 unused)."""
    tau = params.tau if modulus is None else modulus
    e = params.eta if eta is None else eta
    out = np.zeros(4, dtype=complex)
    for a in (1, 2, 3):
        k = a + 1
        out[a] = theta(k, 2 * e, tau) * theta(k, 0, tau) / theta(k, e, tau) ** 2
    return out


def j_alpha_tilde(params: ModularParams) -> np.ndarray:
    """Tilded constants: ``eta -> tau/2`` and modulus ``2 eta``."""
    return j_alpha(params, modulus=2 * params.eta, eta=params.tau / 2)


def structure_constants(params: ModularParams, tilde: bool = False) -> dict:
    """``J_{12}, J_{23}, J_{31}`` keyed by pairs; values from the theta quotients."""
    if tilde:
        tau, e = 2 * params.eta, params.tau / 2
    else:
        tau, e = params.tau, params.eta
    t = [None] + [theta(a, e, tau) for a in (1, 2, 3, 4)]
    return {
        (1, 2): t[1] ** 2 * t[4] ** 2 / (t[2] ** 2 * t[3] ** 2),
        (2, 3): t[1] ** 2 * t[2] ** 2 / (t[3] ** 2 * t[4] ** 2),
        (3, 1): -t[1] ** 2 * t[3] ** 2 / (t[2] ** 2 * t[4] ** 2),
    }


def _commutator_residuals(ops, J, fn, pts):
    out = []
    for a, b, c in CYCLIC:
        s0, sa, sb, sc = ops[0], ops[a], ops[b], ops[c]
        lhs = (sa @ sb - sb @ sa).apply(fn, pts)
        rhs = 1j * (s0 @ sc + sc @ s0).apply(fn, pts)
        out.append(_rel(lhs, rhs))
        key = (b, c)
        lhs = (s0 @ sa - sa @ s0).apply(fn, pts)
        rhs = 1j * J[key] * (sb @ sc + sc @ sb).apply(fn, pts)
        out.append(_rel(lhs, rhs))
    return out


def _rel(lhs, rhs):
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    return float(np.max(np.abs(lhs - rhs)) / scale)


def sklyanin_relation_residuals(params, spin, kind="modified", test_functions=(), points=None) -> np.ndarray:
    """Relative residuals of the six defining relations on each test function."""
    ops = generators(params, spin, kind)
    J = structure_constants(params, tilde=(kind == "tilde"))
    res = []
    for fn in test_functions:
        res.extend(_commutator_residuals(ops, J, fn, points))
    return np.array(res)


def cross_relation_residuals(params, g, test_functions=(), points=None) -> np.ndarray:
    """``S^a S~^b = +- S~^b S^a``: commute when ``a, b`` lie in the same block {0,3} or {1,2}."""
    s = generators(params, g, "modified")
    st = generators(params, g, "tilde")
    res = []
    for fn in test_functions:
        for a in range(4):
            for b in range(4):
                sign = 1 if ((a in (0, 3)) == (b in (0, 3))) else -1
                lhs = (s[a] @ st[b]).apply(fn, points)
                rhs = sign * (st[b] @ s[a]).apply(fn, points)
                res.append(_rel(lhs, rhs))
    return np.array(res)


def sklyanin_matrix_residuals(params, mats, tilde: bool = False) -> np.ndarray:
    """The six defining relations for four numeric matrices, relative to the largest product."""
    J = structure_constants(params, tilde)
    s = [np.asarray(m, dtype=complex) for m in mats]
    out = []
    for a, b, c in CYCLIC:
        rels = (
            (s[a] @ s[b], s[b] @ s[a], 1j * (s[0] @ s[c] + s[c] @ s[0])),
            (s[0] @ s[a], s[a] @ s[0], 1j * J[(b, c)] * (s[b] @ s[c] + s[c] @ s[b])),
        )
        for xy, yx, rhs in rels:
            scale = max(np.max(np.abs(xy)), np.max(np.abs(yx)), np.max(np.abs(rhs)), 1e-300)
            out.append(float(np.max(np.abs(xy - yx - rhs)) / scale))
    return np.array(out)


def casimir_values(params, g, tilde=False):
    """Scalar values of ``K0 = sum S^a S^a`` and ``K2 = sum_{a>=1} J_a S^a S^a`` at spin ``g``."""
    if tilde:
        m, e = 2 * params.eta, params.tau / 2
    else:
        m, e = params.tau, params.eta
    k0 = 4 * theta(1, g, m) ** 2
    k2 = 4 * theta(1, g - e, m) * theta(1, g + e, m)
    return complex(k0), complex(k2)


def casimir_residuals(params, spin, kind="modified", points=None):
    """Deviation of both Casimirs from their scalar values, coefficient by coefficient.

    Each Casimir is a difference operator with shifts ``0`` and ``+-2`` steps.  The
    zero-shift coefficient is compared with the scalar and the others with zero,
    relative to the sum of the magnitudes of the individual ``S^a S^a`` contributions.
    Returns ``[K0 residual, K2 residual]``.
    """
    ops = generators(params, spin, kind)
    g = params.eta * (2 * spin + 1) if kind == "plain" else spin
    k0, k2 = casimir_values(params, g, tilde=(kind == "tilde"))
    J = j_alpha_tilde(params) if kind == "tilde" else j_alpha(params)
    squares = [ops[a] @ ops[a] for a in range(4)]
    out = []
    for weights, scalar in (((1, 1, 1, 1), k0), ((0, J[1], J[2], J[3]), k2)):
        keys = set().union(*(sq.terms for sq in squares))
        worst = 0.0
        for key in keys:
            parts = [w * sq.coefficient(key)(points) for w, sq in zip(weights, squares)]
            total = sum(parts)
            if key == (0, 0, 0):
                total = total - scalar
            scale = np.maximum(sum(np.abs(p) for p in parts), abs(scalar))
            worst = max(worst, float(np.max(np.abs(total) / scale)))
        out.append(worst)
    return np.array(out)


def matrix_rep(op: DifferenceOperator, basis: BasisSet, seed: int = 0, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Matrix ``A`` with ``op b_j = sum_k b_k A[k, j]``.

    Membership is judged against the magnitude of the individual shifted terms,
    so an operator that annihilates the span (image far below its term scale)
    is represented by a zero matrix instead of being rejected.  Raises
    :class:`NotInvariantError` when the image leaves the span beyond ``tol``.
    """
    pts = fit_points(len(basis), seed)
    pairs = [op.apply_with_scale(b, pts) for b in basis.functions]
    vals = np.stack([v for v, _ in pairs], axis=-1)
    scale = max(float(np.max([s for _, s in pairs])), 1e-300)
    fit = fit_in_basis(vals, basis, pts)
    miss = basis.evaluate(pts) @ fit.coefficients - vals
    resid = float(np.max(np.abs(miss))) / scale
    if resid > tol:
        raise NotInvariantError(f"operator image not in span (relative residual {resid:.2e})")
    return fit.coefficients
