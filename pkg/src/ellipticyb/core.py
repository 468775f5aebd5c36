"""Jacobi theta functions, q-Pochhammer symbols and the elliptic gamma function.

Conventions::

    theta1(z|tau) = -sum_n exp(pi i (n+1/2)^2 tau) exp(2 pi i (n+1/2)(z+1/2))
    theta2(z) = theta1(z+1/2),  theta3(z) = exp(pi i tau/4 + pi i z) theta2(z+tau/2),
    theta4(z) = theta3(z+1/2)
    Gamma(z) = prod_{n,m>=0} (1 - e^{-2 pi i z} p^{n+1} q^{m+1}) / (1 - e^{2 pi i z} p^n q^m)

with ``p = exp(2 pi i tau)`` and ``q = exp(4 pi i eta)``.  All functions accept
numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "PrecisionError",
    "PoleProximityError",
    "DomainError",
    "PrecisionConfig",
    "ModularParams",
    "DEFAULT_PRECISION",
    "theta1",
    "theta",
    "qpochhammer",
    "theta_mult",
    "r_const",
    "elliptic_gamma",
    "gamma_prod",
]

TWO_PI_I = 2j * np.pi
MACHINE_EPS = float(np.finfo(float).eps)


class PrecisionError(ArithmeticError):
    """A series or product failed to reach the requested tolerance."""


class PoleProximityError(ArithmeticError):
    """An argument lies too close to a pole of the elliptic gamma function."""


class DomainError(ValueError):
    """Parameters outside the region where an integral representation converges."""


@dataclass(frozen=True)
class PrecisionConfig:
    eps: float = MACHINE_EPS
    max_terms: int = 400
    pole_eps: float = 1e-12

    def __post_init__(self):
        if not (self.eps >= MACHINE_EPS):
            raise ValueError(f"eps must be at least machine epsilon {MACHINE_EPS:.3e}, got {self.eps!r}")
        if self.max_terms < 8:
            raise ValueError(f"max_terms must be at least 8, got {self.max_terms}")
        if not (self.pole_eps > 0):
            raise ValueError("pole_eps must be positive")


DEFAULT_PRECISION = PrecisionConfig()


@dataclass(frozen=True)
class ModularParams:
    """Modular parameter ``tau`` and crossing parameter ``eta``.

    Both must lie in the upper half plane.  ``p = e^{2 pi i tau}`` and
    ``q = e^{4 pi i eta}`` are the nomes of the elliptic gamma function.
    """

    tau: complex = 0.2 + 1.0j
    eta: complex = 0.35 + 0.40j

    def __post_init__(self):
        tau, eta = complex(self.tau), complex(self.eta)
        if not tau.imag > 0:
            raise ValueError(f"Im(tau) must be positive, got tau={tau}")
        if not eta.imag > 0:
            raise ValueError(f"Im(eta) must be positive, got eta={eta}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "eta", eta)

    @cached_property
    def p(self) -> complex:
        return np.exp(TWO_PI_I * self.tau)

    @cached_property
    def q(self) -> complex:
        return np.exp(2 * TWO_PI_I * self.eta)

    def swapped(self) -> "ModularParams":
        """Exchange the roles of ``2 eta`` and ``tau``."""
        return ModularParams(tau=2 * self.eta, eta=self.tau / 2)

    def shift(self, key) -> complex:
        """Value of ``a*eta + b*tau/2 + c/2`` for an integer triple ``(a, b, c)``."""
        a, b, c = key
        return a * self.eta + b * self.tau / 2 + c * 0.5


def _check_tau(tau) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError(f"modulus must have positive imaginary part, got {tau}")
    return tau


def _series_range(z, tau: complex, cfg: PrecisionConfig) -> int:
    # Solve pi k^2 Im(tau) - 2 pi k Y >= L for the half-integer index k.
    y = float(np.max(np.abs(np.imag(z)))) if np.size(z) else 0.0
    t = tau.imag
    big_l = -np.log(cfg.eps) + np.pi * (t / 4 + y) + 2.0
    k = (y + np.sqrt(y * y + t * big_l / np.pi)) / t
    n = int(np.ceil(k)) + 2
    if n > cfg.max_terms:
        raise PrecisionError(
            f"theta series needs {n} terms (> max_terms={cfg.max_terms}); "
            f"|Im z|={y:.3g}, Im tau={t:.3g}"
        )
    return n


def _theta_series(z, tau, half: bool, alternating: bool, cfg: PrecisionConfig):
    """sum_n s^n exp(pi i k^2 tau + 2 pi i k z), k = n (+1/2 if half)."""
    z = np.asarray(z, dtype=complex)
    n_max = _series_range(z, tau, cfg)
    n = np.arange(-n_max, n_max + 1)
    k = n + 0.5 if half else n.astype(float)
    sign = np.where(n % 2 == 0, 1.0, -1.0) if alternating else np.ones_like(k)
    expo = 1j * np.pi * k**2 * tau + TWO_PI_I * np.multiply.outer(z, k)
    terms = sign * np.exp(expo)
    total = terms.sum(axis=-1)
    # Geometric bound on the neglected tail relative to the largest term.
    mags = np.abs(terms)
    peak = mags.max(axis=-1)
    edge = np.maximum(mags[..., 0], mags[..., -1])
    ratio = np.exp(-np.pi * tau.imag * (2 * n_max) + TWO_PI_I.imag * np.max(np.abs(z.imag), initial=0.0))
    ratio = min(float(ratio), 0.5)
    tail = edge * ratio / (1 - ratio)
    if np.any(tail > cfg.eps * np.maximum(peak, 1e-300) * 10):
        raise PrecisionError("theta series tail above tolerance")
    return total


def theta1(z, tau, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Odd Jacobi theta function ``theta1(z|tau)``; ``theta1(z+1) = -theta1(z)``."""
    tau = _check_tau(tau)
    # -sum e^{pi i k^2 tau} e^{2 pi i k (z+1/2)} = -sum e^{pi i k} (...) with k half-integer
    return _theta_series(np.asarray(z, dtype=complex) + 0.5, tau, True, False, cfg) * -1.0


def theta(a: int, z, tau, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Jacobi theta function ``theta_a(z|tau)`` for ``a`` in 1..4."""
    tau = _check_tau(tau)
    if a == 1:
        return theta1(z, tau, cfg)
    if a == 2:
        return _theta_series(z, tau, True, False, cfg)
    if a == 3:
        return _theta_series(z, tau, False, False, cfg)
    if a == 4:
        return _theta_series(z, tau, False, True, cfg)
    raise ValueError(f"theta index must be 1..4, got {a}")


def qpochhammer(t, p, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Infinite product ``(t; p)_inf = prod_{k>=0} (1 - t p^k)`` for ``|p| < 1``."""
    p = complex(p)
    ap = abs(p)
    if not ap < 1:
        raise ValueError(f"|p| must be < 1, got {ap}")
    t = np.asarray(t, dtype=complex)
    tmax = float(np.max(np.abs(t))) if t.size else 0.0
    if tmax == 0.0 or ap == 0.0:
        return np.ones_like(t) - t
    # tail sum_{k>=K} |t| |p|^k / (1 - ...) < eps
    k_min = int(np.ceil(np.log(cfg.eps * (1 - ap) / (2 * tmax)) / np.log(ap))) + 1
    k_min = max(k_min, 1)
    if k_min > 50 * cfg.max_terms:
        raise PrecisionError(f"q-Pochhammer needs {k_min} factors")
    powers = p ** np.arange(k_min)
    return np.prod(1 - np.multiply.outer(t, powers), axis=-1)


def theta_mult(t, p, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Multiplicative theta function ``theta(t; p) = (t; p)_inf (p/t; p)_inf``."""
    t = np.asarray(t, dtype=complex)
    return qpochhammer(t, p, cfg) * qpochhammer(p / t, p, cfg)


def r_const(tau, cfg: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Normalisation ``R(tau) = p^{-1/8} / (i (p; p)_inf)`` with ``p^{-1/8} = e^{-pi i tau/4}``.

    With this constant ``theta1(z|tau) = e^{-pi i z} theta(e^{2 pi i z}; p) / R(tau)``.
    """
    tau = _check_tau(tau)
    p = np.exp(TWO_PI_I * tau)
    return complex(np.exp(-1j * np.pi * tau / 4) / (1j * qpochhammer(p, p, cfg)))


def gamma_prod(x, p, q, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Elliptic gamma function in multiplicative form ``Gamma(x; p, q)``."""
    p, q = complex(p), complex(q)
    x = np.asarray(x, dtype=complex)
    r = max(abs(p), abs(q))
    if not r < 1:
        raise ValueError("nomes must satisfy |p|, |q| < 1")
    amp = max(float(np.max(np.abs(x), initial=1.0)),
              float(np.max(np.abs(p * q / x), initial=1.0)))
    # number of factors on the anti-diagonal n+m=N is N+1; bound (N+1) amp r^N/(1-r)
    n_cut = 1
    while (n_cut + 2) * amp * r ** n_cut / (1 - r) ** 2 > cfg.eps:
        n_cut += 1
        if n_cut > cfg.max_terms:
            raise PrecisionError("elliptic gamma product failed to converge")
    n, m = np.meshgrid(np.arange(n_cut + 1), np.arange(n_cut + 1), indexing="ij")
    mask = (n + m) <= n_cut
    pq = (p ** n[mask]) * (q ** m[mask])
    den = 1 - np.multiply.outer(x, pq)
    close = np.min(np.abs(den), axis=-1) if den.size else np.array(1.0)
    if np.any(close < cfg.pole_eps):
        raise PoleProximityError(
            f"elliptic gamma evaluated within {float(np.min(close)):.2e} of a pole"
        )
    num = 1 - np.multiply.outer(1 / x, pq * p * q)
    return np.prod(num, axis=-1) / np.prod(den, axis=-1)


def elliptic_gamma(z, params: ModularParams, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Additive elliptic gamma function ``Gamma(z | tau, 2 eta)``.

    Raises
    ------
    PoleProximityError
        If some denominator factor is smaller than ``cfg.pole_eps``; poles sit at
        ``Z + tau Z_{<=0} + 2 eta Z_{<=0}``.
    """
    z = np.asarray(z, dtype=complex)
    return gamma_prod(np.exp(TWO_PI_I * z), params.p, params.q, cfg)
