"""Intertwining operators ``M(g)``: finite-difference lattice forms and the integral form.

On the lattice ``g = n eta + m tau/2`` (and ``1/2`` plus it) ``M(g)`` is a product of
the raising operators ``A_k`` and ``B_k``.  For generic ``g`` it is an integral
operator with elliptic gamma kernel, computed by periodic trapezoidal quadrature
on ``[0, 1]`` plus explicit residues for kernel poles that have crossed the
real segment (analytic continuation in ``z``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    DomainError,
    ModularParams,
    elliptic_gamma,
    qpochhammer,
    r_const,
    theta,
)
from .diffops import DifferenceOperator, multiplication, residual, shift_op
from .sklyanin import generator_S_modified, generator_S_tilde

__all__ = [
    "A_op",
    "B_op",
    "M_lattice",
    "M_eta_plain",
    "kappa",
    "gamma4",
    "integral_kernel",
    "M_integral",
    "QuadratureResult",
    "SingularNormalisationError",
    "inversion_residual",
    "star_triangle_residual",
    "contiguous_residual",
    "k_independence_residual",
    "path_independence_residual",
    "nullspace_residual",
    "lattice_intertwining_residual",
    "beta_integral_check",

    "S_mult",
]

MARGIN = 0.02


def _c_a(params):
    return np.exp(1j * np.pi * params.eta) / r_const(params.tau)


def _c_b(params):
    return np.exp(1j * np.pi * params.tau / 2) / r_const(2 * params.eta)


def A_op(params: ModularParams, k: int, g) -> DifferenceOperator:
    """Raising operator with ``A_k(g) M(g) = M(g + eta) th_k(z|tau/2)``."""
    t2, e = params.tau / 2, params.eta
    c = _c_a(params)
    op = DifferenceOperator(params, {
        (1, 0, 0): lambda z: c * theta(k, z + g + e, t2) / theta(1, 2 * z, params.tau),
        (-1, 0, 0): lambda z: -c * theta(k, z - g - e, t2) / theta(1, 2 * z, params.tau),
    })
    return op.gaussian_conjugate(1 / e)


def B_op(params: ModularParams, k: int, g) -> DifferenceOperator:
    """Raising operator with ``B_k(g) M(g) = M(g + tau/2) th_k(z|eta)``."""
    t2, e = params.tau / 2, params.eta
    c = _c_b(params)
    op = DifferenceOperator(params, {
        (0, 1, 0): lambda z: c * theta(k, z + g + t2, e) / theta(1, 2 * z, 2 * e),
        (0, -1, 0): lambda z: -c * theta(k, z - g - t2, e) / theta(1, 2 * z, 2 * e),
    })
    return op.gaussian_conjugate(2 / params.tau)


def M_lattice(params: ModularParams, n: int, m: int, half: bool = False, k: int = 3) -> DifferenceOperator:
    """``M(n eta + m tau/2)``, or ``M(1/2 + n eta + m tau/2)`` when ``half``; ``k`` in {3, 4}.

    Built as ``A_k(...)...A_k(m tau/2) B_k(...)...B_k(0) th_k(z|eta)^-m th_k(z|tau/2)^-n``.
    """
    if n < 0 or m < 0:
        raise ValueError("lattice indices must be non-negative")
    if k not in (3, 4):
        raise ValueError("k must be 3 or 4")
    t2, e = params.tau / 2, params.eta
    op = multiplication(params, lambda z: theta(k, z, e) ** (-m) * theta(k, z, t2) ** (-n))
    for j in range(m):
        op = B_op(params, k, j * t2) @ op
    for i in range(n):
        op = A_op(params, k, i * e + m * t2) @ op
    if half:
        op = op @ shift_op(params, (0, 0, 1))
    return op


def M_eta_plain(params: ModularParams) -> DifferenceOperator:
    """``e^{pi i z^2/eta} th1(2z)^-1 (e^{eta d} - e^{-eta d}) e^{-pi i z^2/eta}``; equals ``M(eta)/c_A``."""
    inv = lambda z: 1 / theta(1, 2 * z, params.tau)
    op = DifferenceOperator(params, {(1, 0, 0): inv, (-1, 0, 0): lambda z: -inv(z)})
    return op.gaussian_conjugate(1 / params.eta)


def S_mult(params: ModularParams, a, w, x=None) -> DifferenceOperator:
    """Multiplication by ``Gamma(+-w +- z + a + eta + tau/2)`` with external point ``w``."""
    shift = a + params.eta + params.tau / 2
    return multiplication(params, lambda z: gamma4(params, z, w, shift))


def gamma4(params, z, x, s):
    """``Gamma(+-z +- x + s)``."""
    z, x = np.asarray(z, dtype=complex), np.asarray(x, dtype=complex)
    out = 1
    for a in (1, -1):
        for b in (1, -1):
            out = out * elliptic_gamma(a * z + b * x + s, params)
    return out


def kappa(params: ModularParams) -> complex:
    """``(p; p)_inf (q; q)_inf / 2``."""
    return complex(qpochhammer(params.p, params.p) * qpochhammer(params.q, params.q) / 2)


def integral_kernel(params: ModularParams, g, z, x):
    """``kappa Gamma(+-z +- x - g) / Gamma(-2g, +-2x)``."""
    den = elliptic_gamma(-2 * g, params) * elliptic_gamma(2 * x, params) * elliptic_gamma(-2 * x, params)
    return kappa(params) * gamma4(params, z, x, -g) / den


# --- residue continuation -------------------------------------------------------

def _gamma_residue_at(params: ModularParams, k: int, l: int) -> complex:
    """Residue of ``Gamma(y)`` at the pole ``y = -k tau - 2 l eta``."""
    p, q = params.p, params.q
    y0 = -k * params.tau - 2 * l * params.eta
    x0 = np.exp(2j * np.pi * y0)
    n_cut = 40 + k + l
    num = 1.0 + 0j
    den = 1.0 + 0j
    for n in range(n_cut):
        for m in range(n_cut - n):
            num *= 1 - p ** (n + 1) * q ** (m + 1) / x0
            if (n, m) != (k, l):
                den *= 1 - x0 * p**n * q**m
    # the vanishing factor 1 - e^{2 pi i y} p^k q^l has derivative -2 pi i at y0
    return complex(num / den / (-2j * np.pi))


def _crossed_poles(params, g, z, depth=6):
    """Lattice offsets ``(k, l)`` whose poles ``x = +-z + g' ...`` sit above the real line.

    The kernel ``Gamma(+-z +- x - g)`` has lower pole sequences at
    ``x = s z + g - k tau - 2 l eta`` (``s = +-1``).  Returns a list of ``(s, k, l)``
    with ``Im`` of that point positive, and raises if one is within ``MARGIN`` of
    the segment.
    """
    out = []
    zi = np.atleast_1d(np.asarray(z, dtype=complex))
    for s in (1, -1):
        for k in range(depth):
            for l in range(depth):
                pts = s * zi + g - k * params.tau - 2 * l * params.eta
                im = pts.imag
                if np.any(np.abs(im) < MARGIN):
                    raise DomainError(
                        f"kernel pole within {MARGIN} of the integration segment (z={zi}, g={g})"
                    )
                if np.any(im > 0):
                    out.append((s, k, l, im > 0))
    return out


class SingularNormalisationError(DomainError):
    """``1/Gamma(-2g)`` is infinite: ``-2g`` is a zero of the elliptic gamma function."""


def _check_normalisation(params, g, tol=1e-9, depth=8):
    """Reject ``g`` when ``-2g`` lies on the zero lattice ``(j+1) tau + 2 (k+1) eta + Z`` of Gamma."""
    for j in range(depth):
        for k in range(depth):
            d = -2 * g - (j + 1) * params.tau - 2 * (k + 1) * params.eta
            if abs(d - round(d.real)) < tol:
                raise SingularNormalisationError(
                    f"Gamma(-2g) vanishes at g = {g}; the integral operator "
                    "is not defined (M(-g) has a pole there and M(g) is not invertible)"
                )


@dataclass
class QuadratureResult:
    value: np.ndarray
    error: float
    nodes: int


def _trapezoid(integrand, n):
    x = (np.arange(n) + 0.5) / n
    return integrand(x).mean(axis=-1)


def M_integral(params: ModularParams, g, f: Callable, z, nodes: int = 64, max_nodes: int = 512,
               tol: float = 1e-12, continue_poles: bool = True) -> QuadratureResult:
    """Apply the integral operator ``M(g)`` to the even function ``f`` at points ``z``.

    The periodic trapezoidal rule on ``[0, 1]`` is doubled until two successive
    estimates agree to ``tol`` (relative) or ``max_nodes`` is reached.  Where a
    pole of the kernel has crossed the segment, its residue is added so that the
    result is the analytic continuation from ``Im(-g +- z) > 0``; with
    ``continue_poles=False`` such points raise :class:`DomainError`.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_normalisation(params, g)
    crossed = _crossed_poles(params, g, z)
    if crossed and not continue_poles:
        raise DomainError("Im(-g +- z) > 0 violated and continuation disabled")

    def integrand(x):
        zz = z[:, None]
        return integral_kernel(params, g, zz, x[None, :]) * f(x)[None, :]

    n = nodes
    prev = _trapezoid(integrand, n)
    err = np.inf
    while n < max_nodes:
        n *= 2
        cur = _trapezoid(integrand, n)
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        err = float(np.max(np.abs(cur - prev))) / scale
        prev = cur
        if err < tol:
            break
    value = prev
    if crossed:
        value = value + _residue_correction(params, g, f, z, crossed)
    return QuadratureResult(value, err, n)


def _residue_correction(params, g, f, z, crossed):
    """``-4 pi i sum Res`` over crossed lower poles (the even integrand pairs them with upper ones)."""
    kap = kappa(params)
    den_g = elliptic_gamma(-2 * g, params)
    corr = np.zeros(z.shape, dtype=complex)
    for s, k, l, mask in crossed:
        lam = k * params.tau + 2 * l * params.eta
        zs = z[mask]
        x0 = s * zs + g - lam
        # factor Gamma(-s z + x - g) is singular at x0 with argument -lam
        res_gamma = _gamma_residue_at(params, k, l)
        others = (
            elliptic_gamma(s * zs + x0 - g, params)
            * elliptic_gamma(s * zs - x0 - g, params)
            * elliptic_gamma(-s * zs - x0 - g, params)
        )
        den = den_g * elliptic_gamma(2 * x0, params) * elliptic_gamma(-2 * x0, params)
        corr[mask] += -4j * np.pi * kap * res_gamma * others * f(x0) / den
    return corr


# --- lattice checks ---------------------------------------------------------------

def _relmax(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def contiguous_residual(params, n, m, k, f, points, which="A") -> float:
    """``A_k(g) M(g) f = M(g + eta) th_k(z|tau/2) f`` (or the ``B`` analogue) at ``g = n eta + m tau/2``."""
    g = n * params.eta + m * params.tau / 2
    mg = M_lattice(params, n, m, k=k)
    if which == "A":
        lhs = A_op(params, k, g) @ mg
        rhs = M_lattice(params, n + 1, m, k=k) @ multiplication(params, lambda z: theta(k, z, params.tau / 2))
    else:
        lhs = B_op(params, k, g) @ mg
        rhs = M_lattice(params, n, m + 1, k=k) @ multiplication(params, lambda z: theta(k, z, params.eta))
    return residual(lhs, rhs, f, points)


def k_independence_residual(params, n, m, half, f, points) -> float:
    """Difference between the ``k = 3`` and ``k = 4`` constructions of ``M(g)``."""
    return residual(M_lattice(params, n, m, half, 3), M_lattice(params, n, m, half, 4), f, points)


def path_independence_residual(params, n, m, f, points) -> float:
    """Compare the ``A``-last product with the ``B``-last product ``B...B A...A th^-n th^-m``."""
    t2, e, k = params.tau / 2, params.eta, 3
    op = multiplication(params, lambda z: theta(k, z, e) ** (-m) * theta(k, z, t2) ** (-n))
    for i in range(n):
        op = A_op(params, k, i * e) @ op
    for j in range(m):
        op = B_op(params, k, n * e + j * t2) @ op
    return residual(op, M_lattice(params, n, m, k=k), f, points)


def nullspace_residual(params, n, m, half=False, seed=0) -> float:
    """``M(g) Gamma(+-z +- x + g) = 0`` at ``g = (n+1) eta + (m+1) tau/2``, relative to the term scale."""
    from .bases import FiniteRep, generating_function, sample_points

    rep = FiniteRep(n, m, half)
    op = M_lattice(params, n + 1, m + 1, half=half)
    z = sample_points(6, seed)
    x = sample_points(6, seed + 1)
    zz, xx = np.meshgrid(z, x, indexing="ij")
    total = np.zeros(zz.shape, dtype=complex)
    scale = np.zeros(zz.shape)
    for key, c in op.terms.items():
        term = c(zz) * generating_function(params, rep, zz + params.shift(key), xx)
        total += term
        scale += np.abs(term)
    return float(np.max(np.abs(total) / scale))


def lattice_intertwining_residual(params, n, m, half, fns, points, tilde=False) -> float:
    """``M(g) S^a(g) = S^a(-g) M(g)`` for all ``a`` on the lattice ``g``."""
    g = 0.5 * half + n * params.eta + m * params.tau / 2
    mg = M_lattice(params, n, m, half=half)
    build = generator_S_tilde if tilde else generator_S_modified
    worst = 0.0
    for a in range(4):
        lhs = mg @ build(params, a, g)
        rhs = build(params, a, -g) @ mg
        for f in fns:
            worst = max(worst, residual(lhs, rhs, f, points))
    return worst


# --- integral identities ------------------------------------------------------------

def _gamma_pm2(params, x):
    return elliptic_gamma(2 * x, params) * elliptic_gamma(-2 * x, params)


def beta_integral_check(params, a, b, z1, z2, x, nodes=32, max_nodes=512, tol=1e-13):
    """Kernel form of the elliptic beta integral.

    ``kappa int Gamma(+-z+-z1-a)/Gamma(-2a,+-2z) Gamma(+-z+-z2+a+b+eta+tau/2)
    Gamma(+-x+-z-b)/Gamma(-2b,+-2x) dz`` against
    ``Gamma(+-z1+-z2+b+eta+tau/2) Gamma(+-x+-z1-a-b)/Gamma(-2a-2b,+-2x) Gamma(+-x+-z2+a+eta+tau/2)``.
    Returns ``(relative error, nodes used)``.
    """
    e, t2 = params.eta, params.tau / 2
    conds = {"-a+-z1": (-a + z1, -a - z1), "-a+-x": (-a + x, -a - x), "-b+-x": (-b + x, -b - x),
             "a+b+-z2+eta+tau/2": (a + b + z2 + e + t2, a + b - z2 + e + t2)}
    for name, vals in conds.items():
        if not all(np.imag(v) > MARGIN for v in vals):
            raise DomainError(f"beta integral requires Im({name}) > 0")
    kap = kappa(params)
    ga, gb = elliptic_gamma(-2 * a, params), elliptic_gamma(-2 * b, params)
    gx = _gamma_pm2(params, x)

    def integrand(zv):
        return (kap * gamma4(params, zv, z1, -a) / (ga * _gamma_pm2(params, zv))
                * gamma4(params, zv, z2, a + b + e + t2)
                * gamma4(params, x, zv, -b) / (gb * gx))

    n = nodes
    prev = _trapezoid(integrand, n)
    while n < max_nodes:
        n *= 2
        cur = _trapezoid(integrand, n)
        done = abs(cur - prev) < tol * abs(cur)
        prev = cur
        if done:
            break
    rhs = (gamma4(params, z1, z2, b + e + t2)
           * gamma4(params, x, z1, -a - b) / (elliptic_gamma(-2 * a - 2 * b, params) * gx)
           * gamma4(params, x, z2, a + e + t2))
    return float(abs(prev - rhs) / abs(rhs)), n


def inversion_residual(params, n, m, f, points, nodes=64, max_nodes=512) -> float:
    """``M_lattice(g) M_integral(-g) f = f`` at ``g = n eta + m tau/2`` (relative, max over points).

    The lattice operator evaluates the integral at shifted points outside the
    convergence strip, where crossed kernel poles contribute residues.
    """
    g = n * params.eta + m * params.tau / 2
    lat = M_lattice(params, n, m)
    out = 0
    for key, c in lat.terms.items():
        r = M_integral(params, -g, f, points + params.shift(key), nodes=nodes, max_nodes=max_nodes)
        out = out + c(points) * r.value
    ref = f(points)
    return float(np.max(np.abs(out - ref) / np.abs(ref)))


def star_triangle_residual(params, alpha, beta, w, f, points, nodes=32, max_nodes=512) -> float:
    """``S(alpha) M(alpha+beta) S(beta) f = M(beta) S(alpha+beta) M(alpha) f``.

    ``S(a)`` multiplies by ``Gamma(+-w +- z + a + eta + tau/2)`` with external point
    ``w``; ``M`` are integral operators.  With ``alpha = 0`` the operator ``M(0)``
    is the identity and ``S(0) = 1`` by reflection.
    """
    e, t2 = params.eta, params.tau / 2
    s = lambda a, z: gamma4(params, z, w, a + e + t2)
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    quad = dict(nodes=nodes, max_nodes=max_nodes, continue_poles=False)
    inner = lambda x: s(beta, x) * f(x)
    lhs = s(alpha, points) * M_integral(params, alpha + beta, inner, points, **quad).value
    if alpha == 0:
        mid = lambda x: s(alpha + beta, x) * f(x)
    else:
        mid = lambda x: s(alpha + beta, x) * M_integral(params, alpha, f, x, **quad).value
    rhs = M_integral(params, beta, mid, points, **quad).value
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
