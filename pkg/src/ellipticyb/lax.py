"""Baxter's R-matrix, Lax operators and their factorised forms, YBE and RLL residuals."""
from __future__ import annotations

import numpy as np

from .core import ModularParams, theta
from .diffops import DifferenceOperator, OperatorMatrix
from .sklyanin import generators

__all__ = [
    "PAULI",
    "weights",
    "baxter_R",
    "lax_L",
    "lax_L_factorized",
    "light_cone",
    "ybe_residual",
    "rll_residual",
    "rll_residual_numeric",
    "sigma3_shift_residual",
    "lax_from_matrices",
]

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _moduli(params: ModularParams, tilde: bool):
    """(step, modulus of the weights) for the plain or the exchanged sector."""
    if tilde:
        return params.tau / 2, 2 * params.eta
    return params.eta, params.tau


def weights(params: ModularParams, u, tilde: bool = False) -> np.ndarray:
    """``w_a(u) = th_{a+1}(u + eta) / th_{a+1}(eta)``; with ``tilde`` use ``tau/2`` and modulus ``2 eta``."""
    step, mod = _moduli(params, tilde)
    return np.array([theta(a + 1, u + step, mod) / theta(a + 1, step, mod) for a in range(4)])


def baxter_R(params: ModularParams, u, tilde: bool = False) -> np.ndarray:
    """4x4 matrix ``sum_a w_a(u) sigma_a (x) sigma_a``."""
    w = weights(params, u, tilde)
    return sum(w[a] * np.kron(PAULI[a], PAULI[a]) for a in range(4))


def lax_from_matrices(w, mats) -> np.ndarray:
    """``sum_a w_a sigma_a (x) X^a`` for numeric quantum-space matrices ``X^a``."""
    return sum(w[a] * np.kron(PAULI[a], mats[a]) for a in range(4))


def lax_L(params: ModularParams, u, spin, kind: str = "plain") -> OperatorMatrix:
    """Lax operator ``sum_a w_a(u) sigma_a (x) S^a`` as a 2x2 matrix of difference operators.

    ``kind`` is ``plain`` (spin ``ell``), ``modified`` (spin ``g``) or ``tilde``
    (spin ``g``, exchanged quasi-periods and weights).
    """
    s = generators(params, spin, kind)
    w = weights(params, u, tilde=(kind == "tilde"))
    a = [s[k].scale(w[k]) for k in range(4)]
    return OperatorMatrix(
        [
            [a[0] + a[3], a[1] + a[2].scale(-1j)],
            [a[1] + a[2].scale(1j), a[0] - a[3]],
        ]
    )


def light_cone(params: ModularParams, u, spin, kind: str = "plain"):
    """Return ``(u1, u2)`` with ``u = u1 + u2``.

    ``plain``: ``u1 - u2 = (2 ell + 1) eta``; ``modified``/``tilde``: ``u1 - u2 = g``.
    """
    diff = (2 * spin + 1) * params.eta if kind == "plain" else spin
    return (u + diff) / 2, (u - diff) / 2


def lax_L_factorized(params: ModularParams, u1, u2, kind: str = "plain") -> OperatorMatrix:
    """Lax operator assembled from two theta-function matrices around ``diag(e^{s d}, e^{-s d})``."""
    tilde = kind == "tilde"
    step, mod = _moduli(params, tilde)
    bar = params.eta if tilde else params.tau / 2
    skey = (0, 1, 0) if tilde else (1, 0, 0)
    keys = (skey, tuple(-k for k in skey))
    steps = (step, -step)

    def left(i, j):
        # rows: theta3, theta4; columns: z - u1 with +, z + u1 with -
        a = 3 if i == 0 else 4
        sign = (1 if i == 0 else -1) * (1 if j == 0 else -1)
        return lambda z: sign * theta(a, z - u1 if j == 0 else z + u1, bar) / theta(1, 2 * z, mod)

    def right(j, k):
        a = 4 if k == 0 else 3
        return lambda z: theta(a, z + u2 if j == 0 else z - u2, bar)

    rows = []
    for i in range(2):
        row = []
        for k in range(2):
            terms = {}
            for j in range(2):
                lf, rf, s = left(i, j), right(j, k), steps[j]
                terms[keys[j]] = lambda z, lf=lf, rf=rf, s=s: lf(z) * rf(z + s)
            row.append(DifferenceOperator(params, terms))
        rows.append(row)
    out = OperatorMatrix(rows)
    if kind == "modified":
        out = out.gaussian_conjugate(1 / params.eta)
    elif tilde:
        out = out.gaussian_conjugate(2 / params.tau)
    return out


def _relnorm(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def ybe_residual(params: ModularParams, u, v, tilde: bool = False) -> float:
    """``R12(u-v) R13(u) R23(v) - R23(v) R13(u) R12(u-v)`` relative to the largest entry."""
    eye = np.eye(2)
    r12 = np.kron(baxter_R(params, u - v, tilde), eye)
    r23 = np.kron(eye, baxter_R(params, v, tilde))
    r13 = _embed13(baxter_R(params, u, tilde))
    return _relnorm(r12 @ r13 @ r23, r23 @ r13 @ r12)


def _embed13(r):
    t = r.reshape(2, 2, 2, 2)
    out = np.einsum("acbd,ef->aecbfd", t, np.eye(2))
    return out.reshape(8, 8)


def rll_residual_numeric(r, l1, l2) -> float:
    """Quantum-space-numeric RLL: ``R12 L13 L23 = L23 L13 R12`` for 2x2 blocks of size d."""
    d = l1.shape[0] // 2
    big_r = np.kron(r, np.eye(d))
    l13 = _embed_l(l1, 0, d)
    l23 = _embed_l(l2, 1, d)
    return _relnorm(big_r @ l13 @ l23, l23 @ l13 @ big_r)


def _embed_l(l, slot, d):
    t = l.reshape(2, d, 2, d)
    eye = np.eye(2)
    if slot == 0:
        return np.einsum("aibj,ce->acibej", t, eye).reshape(4 * d, 4 * d)
    return np.einsum("ab,cidj->acibdj", eye, t).reshape(4 * d, 4 * d)


def rll_residual(params, r, l1: OperatorMatrix, l2: OperatorMatrix, test_functions, points, twist=False) -> float:
    """Operator RLL relation on test functions; ``twist`` right-multiplies each L by ``sigma3``."""
    if twist:
        l1 = l1 @ PAULI[3]
        l2 = l2 @ PAULI[3]
    eye = np.eye(2)
    l13 = l1.kron_right(eye)
    l23 = l2.kron_left(eye)
    lhs = r @ (l13 @ l23)
    rhs = (l23 @ l13) @ r
    worst = 0.0
    for fn in test_functions:
        worst = max(worst, _relnorm(lhs.apply(fn, points), rhs.apply(fn, points)))
    return worst


def sigma3_shift_residual(params, u1, u2, test_functions, points) -> float:
    """``L(u1 - tau/2, u2 - tau/2) sigma3 = -e^{2 pi i (eta - tau/2 + u1 + u2)} sigma3 L(u1, u2)``."""
    t2 = params.tau / 2
    lhs = lax_L_factorized(params, u1 - t2, u2 - t2, "modified") @ PAULI[3]
    rhs = (PAULI[3] @ lax_L_factorized(params, u1, u2, "modified")).scale(
        -np.exp(2j * np.pi * (params.eta - t2 + u1 + u2))
    )
    worst = 0.0
    for fn in test_functions:
        worst = max(worst, _relnorm(lhs.apply(fn, points), rhs.apply(fn, points)))
    return worst
