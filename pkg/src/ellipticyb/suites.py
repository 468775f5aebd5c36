"""Named verification checks grouped into suites.

Each :class:`Check` turns a :class:`RunConfig` into one residual.  The command
line driver runs whole suites; the test-suite picks individual checks by id.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import core, fusion, intertwiner, lax, reduction, sklyanin
from .bases import FiniteRep, sample_points, theta2n_basis
from .core import ModularParams, PrecisionConfig, elliptic_gamma, r_const, theta

__all__ = [
    "RunConfig",
    "Check",
    "CheckResult",
    "VerificationReport",
    "SUITES",
    "EXCLUDED",
    "suite_checks",
    "find_check",
    "run_check",
    "run_suite",
    "parse_complex",
    "format_complex",
]

SUITE_NAMES = ("core", "sklyanin", "lax", "intertwiner", "fusion", "reduction")


def parse_complex(text) -> complex:
    """Parse ``"0.2+1.0i"`` style strings (``j`` is accepted too)."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    return complex(s)


def format_complex(z: complex) -> str:
    """Inverse of :func:`parse_complex` without loss of precision."""
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


@dataclass(frozen=True)
class RunConfig:
    """Parameters of a verification run.

    ``eps`` is the truncation target of the special-function series,
    ``quad_points`` the node cap of the periodic trapezoidal rule, ``seed`` the
    base seed of all sampled points.  ``tolerances`` overrides the tolerance of
    every check in the named suites.
    """

    tau: complex = 0.2 + 1.0j
    eta: complex = 0.35 + 0.40j
    eps: float = core.MACHINE_EPS
    quad_points: int = 512
    seed: int = 0
    tolerances: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tau", parse_complex(self.tau))
        object.__setattr__(self, "eta", parse_complex(self.eta))
        if not self.tau.imag > 0:
            raise ValueError(f"Im(tau) must be positive, got tau={format_complex(self.tau)}")
        if not self.eta.imag > 0:
            raise ValueError(f"Im(eta) must be positive, got eta={format_complex(self.eta)}")
        PrecisionConfig(eps=float(self.eps))
        object.__setattr__(self, "eps", float(self.eps))
        if int(self.quad_points) < 8:
            raise ValueError("quad_points must be at least 8")
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")
        object.__setattr__(self, "quad_points", int(self.quad_points))
        object.__setattr__(self, "seed", int(self.seed))
        tols = dict(self.tolerances)
        for name, tol in tols.items():
            if name not in SUITE_NAMES:
                raise ValueError(f"unknown suite {name!r} in tolerance overrides")
            if not float(tol) > 0:
                raise ValueError(f"tolerance for {name} must be positive")
        object.__setattr__(self, "tolerances", tuple(sorted((k, float(v)) for k, v in tols.items())))

    @property
    def params(self) -> ModularParams:
        return ModularParams(self.tau, self.eta)

    @property
    def precision(self) -> PrecisionConfig:
        return PrecisionConfig(eps=self.eps)

    def tolerance_for(self, suite: str, default: float) -> float:
        return dict(self.tolerances).get(suite, default)

    def to_dict(self) -> dict:
        return {"tau": _cjson(self.tau), "eta": _cjson(self.eta), "eps": self.eps,
                "quad_points": self.quad_points, "seed": self.seed}

    def to_text(self) -> str:
        """``key=value`` lines that :meth:`from_text` reads back unchanged."""
        lines = [f"tau={format_complex(self.tau)}", f"eta={format_complex(self.eta)}",
                 f"eps={self.eps!r}", f"quad_points={self.quad_points}", f"seed={self.seed}"]
        lines += [f"tol.{k}={v!r}" for k, v in self.tolerances]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "RunConfig":
        """Parse ``key=value`` lines (``#`` comments allowed); keyword overrides win."""
        values: dict = {}
        tols: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key.startswith("tol."):
                tols[key[4:]] = float(val)
            elif key in ("tau", "eta"):
                values[key] = parse_complex(val)
            elif key == "eps":
                values[key] = float(val)
            elif key in ("quad_points", "seed"):
                values[key] = int(val)
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        tols.update(dict(overrides.pop("tolerances", ()) or ()))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(tolerances=tuple(tols.items()), **values)


def _cjson(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


@dataclass(frozen=True)
class Check:
    id: str
    fn: Callable[[RunConfig], float]
    tol: float
    description: str = ""

    @property
    def suite(self) -> str:
        return self.id.split(".", 1)[0]


@dataclass
class CheckResult:
    id: str
    residual: float
    tol: float
    passed: bool
    seconds: float
    error: str | None = None

    def to_dict(self, timings: bool = True) -> dict:
        res = self.residual if math.isfinite(self.residual) else None
        out = {"id": self.id, "residual": res, "tol": self.tol, "pass": self.passed,
               "seconds": round(self.seconds, 3) if timings else None}
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class VerificationReport:
    suite: str
    config: RunConfig
    checks: List[CheckResult] = field(default_factory=list)
    excluded: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timings: bool = True) -> dict:
        out = {"suite": self.suite, "params": self.config.to_dict(),
               "checks": [c.to_dict(timings) for c in self.checks], "pass": self.passed}
        if self.excluded:
            out["excluded"] = [{"id": i, "reason": r} for i, r in self.excluded]
        return out


# --- shared inputs -------------------------------------------------------------------------

def _points(cfg, count=10, offset=3, **kw):
    return sample_points(count, cfg.seed + offset, **kw)


def _test_functions(params):
    t, e = params.tau, params.eta
    return [
        lambda z: np.ones_like(z),
        lambda z: theta(3, z, t / 2),
        lambda z: theta(4, z, t / 2) ** 2,
        lambda z: np.exp(2j * np.pi * z) + np.exp(-2j * np.pi * z),
        lambda z: theta(3, z, e),
    ]


def _even_functions(params):
    t = params.tau
    return [
        lambda z: theta(3, z, t / 2),
        lambda z: theta(4, z, t / 2) ** 2,
        lambda z: np.exp(2j * np.pi * z) + np.exp(-2j * np.pi * z),
    ]


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def _relpoint(a, b):
    """Pointwise relative error, worst case."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


U, V, G = 0.31 + 0.07j, -0.12 + 0.04j, 0.3 + 0.17j
ELL = 0.37 + 0.1j


# --- core ------------------------------------------------------------------------------------

def _core_pairs(cfg, count=100):
    x = _points(cfg, count, 101, re=(-0.5, 0.5), im=(-0.3, 0.3))
    y = _points(cfg, count, 102, re=(-0.5, 0.5), im=(-0.3, 0.3))
    return x, y


def _theta_identities(cfg):
    p, pc = cfg.params, cfg.precision
    x, y = _core_pairs(cfg)
    th = lambda a, z: theta(a, z, p.tau, pc)
    b3 = lambda z: theta(3, z, p.tau / 2, pc)
    b4 = lambda z: theta(4, z, p.tau / 2, pc)
    pairs = [
        (2 * th(1, x + y) * th(1, x - y), b4(x) * b3(y) - b4(y) * b3(x)),
        (2 * th(2, x + y) * th(2, x - y), b3(x) * b3(y) - b4(y) * b4(x)),
        (2 * th(3, x + y) * th(3, x - y), b3(x) * b3(y) + b4(y) * b4(x)),
        (2 * th(4, x + y) * th(4, x - y), b4(x) * b3(y) + b4(y) * b3(x)),
    ]
    scale = lambda a, b: np.maximum(np.abs(a), np.abs(b))
    return max(float(np.max(np.abs(a - b) / scale(a, b))) for a, b in pairs)


def _gamma(cfg, z, params=None):
    return elliptic_gamma(z, params or cfg.params, cfg.precision)


def _gamma_shift_eta(cfg):
    p = cfg.params
    z, _ = _core_pairs(cfg)
    lhs = _gamma(cfg, z + 2 * p.eta)
    rhs = r_const(p.tau) * np.exp(1j * np.pi * z) * theta(1, z, p.tau) * _gamma(cfg, z)
    return _relpoint(lhs, rhs)


def _gamma_shift_tau(cfg):
    p = cfg.params
    z, _ = _core_pairs(cfg)
    lhs = _gamma(cfg, z + p.tau)
    rhs = r_const(2 * p.eta) * np.exp(1j * np.pi * z) * theta(1, z, 2 * p.eta) * _gamma(cfg, z)
    return _relpoint(lhs, rhs)


def _gamma_reflection(cfg):
    p = cfg.params
    z, _ = _core_pairs(cfg)
    return float(np.max(np.abs(_gamma(cfg, z) * _gamma(cfg, -z + 2 * p.eta + p.tau) - 1)))


def _gamma_symmetry(cfg):
    z, _ = _core_pairs(cfg)
    return _relpoint(_gamma(cfg, z, cfg.params.swapped()), _gamma(cfg, z))


def _theta_quasiperiods(cfg):
    t = cfg.params.tau
    z, _ = _core_pairs(cfg)
    th = lambda w: theta(1, w, t, cfg.precision)
    return max(_relpoint(th(z + 1), -th(z)),
               _relpoint(th(z + t), -np.exp(-2j * np.pi * z - 1j * np.pi * t) * th(z)),
               _relpoint(th(-z), -th(z)))


def _theta_multiplicative(cfg):
    t = cfg.params.tau
    p = np.exp(2j * np.pi * t)
    z, _ = _core_pairs(cfg, 20)
    rhs = np.exp(-1j * np.pi * z) * core.theta_mult(np.exp(2j * np.pi * z), p) / r_const(t)
    return _relpoint(theta(1, z, t, cfg.precision), rhs)


def _theta_oversampled(cfg):
    t, z = cfg.params.tau, 0.3 + 0.2j
    n = np.arange(-60, 61)[:, None] + 0.5
    ref = -np.sum(np.exp(1j * np.pi * n * n * t) * np.exp(2j * np.pi * n * (z + 0.5)))
    return abs(complex(theta(1, z, t, cfg.precision)) - ref) / abs(ref)


CORE = [
    Check("core.theta_bilinear_identities", _theta_identities, 1e-10,
          "2 th_a(x+y) th_a(x-y) against bilinears in thb3, thb4 at 100 points"),
    Check("core.theta_quasiperiods", _theta_quasiperiods, 1e-10, "oddness and both quasiperiods of th1"),
    Check("core.theta_multiplicative", _theta_multiplicative, 1e-12, "th1 via theta(e^{2 pi i z}; p) / R(tau)"),
    Check("core.theta_oversampled", _theta_oversampled, 1e-13, "th1 against a 121-term direct sum"),
    Check("core.gamma_shift_2eta", _gamma_shift_eta, 1e-11, "Gamma(z + 2 eta) = R(tau) e^{i pi z} th1(z|tau) Gamma(z)"),
    Check("core.gamma_shift_tau", _gamma_shift_tau, 1e-11, "Gamma(z + tau) = R(2 eta) e^{i pi z} th1(z|2 eta) Gamma(z)"),
    Check("core.gamma_reflection", _gamma_reflection, 1e-11, "Gamma(z) Gamma(-z + 2 eta + tau) = 1"),
    Check("core.gamma_quasiperiod_symmetry", _gamma_symmetry, 1e-10, "Gamma(z|tau, 2 eta) = Gamma(z|2 eta, tau)"),
]


# --- sklyanin --------------------------------------------------------------------------------

def _relations(kind):
    def fn(cfg):
        p = cfg.params
        spin = ELL if kind == "plain" else G
        return float(np.max(sklyanin.sklyanin_relation_residuals(p, spin, kind, _test_functions(p), _points(cfg))))
    return fn


def _cross(cfg):
    p = cfg.params
    return float(np.max(sklyanin.cross_relation_residuals(p, G, _test_functions(p), _points(cfg))))


def _casimir(kind):
    def fn(cfg):
        spin = ELL if kind == "plain" else G
        return float(np.max(sklyanin.casimir_residuals(cfg.params, spin, kind, _points(cfg))))
    return fn


def _casimir_symmetry(cfg):
    worst = 0.0
    for tilde in (False, True):
        a = np.array(sklyanin.casimir_values(cfg.params, G, tilde))
        b = np.array(sklyanin.casimir_values(cfg.params, -G, tilde))
        worst = max(worst, _rel(a, b))
    return worst


SKLYANIN = [
    Check("sklyanin.relations_plain", _relations("plain"), 1e-9),
    Check("sklyanin.relations_modified", _relations("modified"), 1e-9),
    Check("sklyanin.relations_tilde", _relations("tilde"), 1e-9),
    Check("sklyanin.cross_relations", _cross, 1e-9, "S^a S~^b = +- S~^b S^a"),
    Check("sklyanin.casimir_plain", _casimir("plain"), 1e-9),
    Check("sklyanin.casimir_modified", _casimir("modified"), 1e-9),
    Check("sklyanin.casimir_tilde", _casimir("tilde"), 1e-9),
    Check("sklyanin.casimir_g_symmetry", _casimir_symmetry, 1e-14, "Casimir scalars invariant under g -> -g"),
]


# --- lax -------------------------------------------------------------------------------------

def _half_reps(cfg):
    p = cfg.params
    basis = theta2n_basis(p, 1)
    return [sklyanin.matrix_rep(sklyanin.generator_S(p, a, 0.5), basis, cfg.seed) for a in range(4)]


def _half_matrix_rep(cfg):
    c = theta(1, 2 * cfg.params.eta, cfg.params.tau)
    return max(_rel(m, c * lax.PAULI[a]) for a, m in enumerate(_half_reps(cfg)))


def _half_baxter(cfg):
    p = cfg.params
    mats = _half_reps(cfg)
    c = theta(1, 2 * p.eta, p.tau)
    return max(_rel(lax.lax_from_matrices(lax.weights(p, u), mats), c * lax.baxter_R(p, u))
               for u in _points(cfg, 5, 20))


def _ybe(tilde):
    def fn(cfg):
        u = _points(cfg, 20, 30, re=(-0.5, 0.5), im=(-0.3, 0.3))
        v = _points(cfg, 20, 31, re=(-0.5, 0.5), im=(-0.3, 0.3))
        return max(lax.ybe_residual(cfg.params, a, b, tilde) for a, b in zip(u, v))
    return fn


def _factorized(kind):
    def fn(cfg):
        p = cfg.params
        spin = ELL if kind == "plain" else G
        u1, u2 = lax.light_cone(p, U, spin, kind)
        ref = lax.lax_L(p, U, spin, kind)
        fac = lax.lax_L_factorized(p, u1, u2, kind)
        pts = _points(cfg)
        return max(_rel(ref.apply(f, pts), fac.apply(f, pts)) for f in _test_functions(p))
    return fn


def _sigma3(cfg):
    p = cfg.params
    u1, u2 = lax.light_cone(p, U, G, "modified")
    return lax.sigma3_shift_residual(p, u1, u2, _test_functions(p), _points(cfg))


def _operator_rll(kind):
    def fn(cfg):
        p = cfg.params
        spin = ELL if kind == "plain" else G
        r = lax.baxter_R(p, U - V, kind == "tilde")
        l1, l2 = lax.lax_L(p, U, spin, kind), lax.lax_L(p, V, spin, kind)
        return lax.rll_residual(p, r, l1, l2, _test_functions(p)[:3], _points(cfg), twist=kind != "plain")
    return fn


LAX = [
    Check("lax.spin_half_generators", _half_matrix_rep, 1e-10, "matrix_rep of S^a on Theta_2 = th1(2 eta) sigma^a"),
    Check("lax.spin_half_baxter", _half_baxter, 1e-10, "restricted Lax = th1(2 eta) Baxter R"),
    Check("lax.ybe_plain", _ybe(False), 1e-10, "Baxter YBE at 20 seeded (u, v)"),
    Check("lax.ybe_tilde", _ybe(True), 1e-10),
    Check("lax.factorized_plain", _factorized("plain"), 1e-10),
    Check("lax.factorized_modified", _factorized("modified"), 1e-10),
    Check("lax.factorized_tilde", _factorized("tilde"), 1e-10),
    Check("lax.sigma3_shift", _sigma3, 1e-10, "L(u1 - tau/2, u2 - tau/2) s3 = -e^{2 pi i (eta - tau/2 + u1 + u2)} s3 L(u1, u2)"),
    Check("lax.rll_plain", _operator_rll("plain"), 1e-9),
    Check("lax.rll_modified", _operator_rll("modified"), 1e-9, "RLL with sigma3-twisted Lax operators"),
    Check("lax.rll_tilde", _operator_rll("tilde"), 1e-9, "RLL with sigma3-twisted Lax operators"),
]


# --- intertwiner -----------------------------------------------------------------------------

def _m_identity(cfg):
    p = cfg.params
    z = _points(cfg)
    worst = 0.0
    for half, key in ((False, (0, 0, 0)), (True, (0, 0, 1))):
        op = intertwiner.M_lattice(p, 0, 0, half=half)
        if set(op.terms) != {key}:
            return math.inf
        worst = max(worst, float(np.max(np.abs(op.terms[key](z) - 1))))
    return worst


LATTICE = [(n, m) for n in range(3) for m in range(3)]


def _contiguous(cfg):
    p = cfg.params
    pts = _points(cfg)
    return max(intertwiner.contiguous_residual(p, n, m, k, f, pts, w)
               for n, m in LATTICE for k in (3, 4) for w in "AB" for f in _test_functions(p)[1:3])


def _k_independence(cfg):
    p = cfg.params
    pts = _points(cfg)
    return max(intertwiner.k_independence_residual(p, n, m, h, f, pts)
               for n, m in LATTICE for h in (False, True) for f in _test_functions(p)[1:3])


def _path_independence(cfg):
    p = cfg.params
    pts = _points(cfg)
    return max(intertwiner.path_independence_residual(p, n, m, f, pts)
               for n, m in LATTICE for f in _test_functions(p)[1:3])


def _nullspace(cfg):
    return max(intertwiner.nullspace_residual(cfg.params, n, m, h, cfg.seed)
               for n, m in LATTICE for h in (False, True))


def _lattice_intertwining(cfg):
    p = cfg.params
    pts = _points(cfg)
    fns = _test_functions(p)
    return max(intertwiner.lattice_intertwining_residual(p, n, m, h, fns, pts, t)
               for n, m in [(1, 0), (0, 1), (1, 1), (2, 1)] for h in (False, True) for t in (False, True))


def _beta_integral(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(5):
        a = rng.uniform(0, 0.5) - 1j * rng.uniform(0.15, 0.3)
        b = rng.uniform(0, 0.5) - 1j * rng.uniform(0.15, 0.3)
        z1, z2, x = (rng.uniform(0.05, 0.45) + 1j * rng.uniform(-0.1, 0.1) for _ in range(3))
        err, _ = intertwiner.beta_integral_check(cfg.params, a, b, z1, z2, x, max_nodes=cfg.quad_points)
        worst = max(worst, err)
    return worst


def _star_triangle(cfg):
    p = cfg.params
    pts = _points(cfg, 10, 5)
    return max(intertwiner.star_triangle_residual(p, a, 0.21 - 0.25j, 0.3 + 0.05j, f, pts, max_nodes=cfg.quad_points)
               for f in _even_functions(p) for a in (0.13 - 0.2j, 0.0))


def _inversion(n, m):
    def fn(cfg):
        p = cfg.params
        pts = _points(cfg, 6, 5, im=(0.03, 0.1))
        return max(intertwiner.inversion_residual(p, n, m, f, pts, max_nodes=cfg.quad_points)
                   for f in _even_functions(p))
    return fn


def _inversion_half_sum(cfg):
    return _inversion(1, 1)(cfg)


INTERTWINER = [
    Check("intertwiner.m0_identity_half_shift", _m_identity, 1e-15, "M(0) = 1 and M(1/2) = e^{(1/2) d} term by term"),
    Check("intertwiner.contiguous", _contiguous, 1e-10),
    Check("intertwiner.k_independence", _k_independence, 1e-10),
    Check("intertwiner.path_independence", _path_independence, 1e-10),
    Check("intertwiner.nullspace", _nullspace, 1e-9, "M(g_nm) annihilates generating functions, (n, m) <= (2, 2)"),
    Check("intertwiner.lattice_intertwining", _lattice_intertwining, 1e-9, "M(g) S^a(g) = S^a(-g) M(g), both halves"),
    Check("intertwiner.beta_integral", _beta_integral, 1e-6, "quadrature against closed form at 5 parameter sets"),
    Check("intertwiner.star_triangle", _star_triangle, 1e-6),
    Check("intertwiner.inversion_eta", _inversion(1, 0), 1e-6),
    Check("intertwiner.inversion_half_tau", _inversion(0, 1), 1e-6),
]

INVERSION_ETA_HALF_TAU = Check("intertwiner.inversion_eta_plus_half_tau", _inversion_half_sum, 1e-6,
                               "M(eta + tau/2) M(-eta - tau/2) = 1")


# --- fusion ----------------------------------------------------------------------------------

def _junction(cfg):
    z = _points(cfg, 6, 40)
    return max(fusion.junction_residual(cfg.params, u, z) for u in (U, 0.23 + 0.11j))


def _closed_form(cfg):
    p = cfg.params
    z = _points(cfg, 6, 41)
    rng = np.random.default_rng(cfg.seed + 41)
    worst = 0.0
    for n in range(1, 5):
        for _ in range(3):
            mu = tuple(rng.normal(size=2) + 1j * rng.normal(size=2))
            u = complex(rng.uniform(-0.4, 0.4) + 1j * rng.uniform(-0.2, 0.2))
            a = fusion.baxter_symbol_product(p, u, z, mu, n)
            b = fusion.baxter_closed_form(p, u, z, mu, n)
            worst = max(worst, _rel(a, b))
    return worst


def _homogeneity(cfg):
    p = cfg.params
    z = _points(cfg, 4, 42)
    mu = (0.7 + 0.2j, -0.3 + 0.5j)
    return max(_rel(fusion.baxter_symbol_product(p, U, z, (2 * mu[0], 2 * mu[1]), n),
                    2 ** n * fusion.baxter_symbol_product(p, U, z, mu, n)) for n in (1, 2, 3))


def _fused(n, key):
    def fn(cfg):
        return fusion.fused_lax_checks(cfg.params, n, seed=cfg.seed)[key]
    return fn


def _lambda_forms(form, tilde=False):
    def fn(cfg):
        p = cfg.params
        pts = _points(cfg)
        worst = 0.0
        for a, b in ((0.17 + 0.05j, -0.08 + 0.11j), (0.29 - 0.04j, 0.13 + 0.02j)):
            ref = fusion.lambda_symbol(p, U, G, a, b, "generator", tilde)
            got = fusion.lambda_symbol(p, U, G, a, b, form, tilde)
            worst = max(worst, max(_rel(ref.apply(f, pts), got.apply(f, pts)) for f in _test_functions(p)))
        return worst
    return fn


def _lambda_swap(cfg):
    p = cfg.params
    q = p.swapped()
    pts = _points(cfg)
    a, b = 0.17 + 0.05j, -0.08 + 0.11j
    tl = fusion.lambda_symbol(p, U, G, a, b, "generator", tilde=True)
    sw = fusion.lambda_symbol(q, U, G, a, b, "generator", tilde=False)
    return max(_rel(tl.apply(f, pts), sw.apply(f, pts)) for f in _test_functions(p))


FUSION = [
    Check("fusion.junction", _junction, 1e-12, "adjacent lateral matrices multiply to 2 th1(2z) th1(u) I"),
    Check("fusion.closed_form", _closed_form, 1e-9, "symbol product against r_n L on the identity symbol, n <= 4"),
    Check("fusion.homogeneity", _homogeneity, 1e-13, "degree n in the spinor mu"),
    Check("fusion.fused2_sklyanin", _fused(2, "sklyanin"), 1e-9),
    Check("fusion.fused2_matrix_rep", _fused(2, "matrix_rep"), 1e-8),
    Check("fusion.fused2_rll", _fused(2, "rll"), 1e-8),
    Check("fusion.fused3_sklyanin", _fused(3, "sklyanin"), 1e-9),
    Check("fusion.fused3_matrix_rep", _fused(3, "matrix_rep"), 1e-8),
    Check("fusion.fused3_rll", _fused(3, "rll"), 1e-8),
    Check("fusion.lambda_theta", _lambda_forms("theta"), 1e-10),
    Check("fusion.lambda_theta_tilde", _lambda_forms("theta", True), 1e-10),
    Check("fusion.lambda_gamma_factorized", _lambda_forms("gamma_factorized"), 1e-8),
    Check("fusion.lambda_gamma_factorized_tilde", _lambda_forms("gamma_factorized", True), 1e-8),
    Check("fusion.lambda_tilde_swap", _lambda_swap, 1e-12, "tilded symbol equals the plain one with 2 eta <-> tau"),
]


# --- reduction -------------------------------------------------------------------------------

AGREEMENT_REPS = [(1, 0), (0, 1), (1, 1), (2, 0)]


def _worked(key):
    def fn(cfg):
        return float(reduction.two_dim_reduction_worked(cfg.params, U, G, seed=7 + cfg.seed)[key])
    return fn


def _agreement(n, m):
    def fn(cfg):
        p = cfg.params
        rep = FiniteRep(n, m)
        z = _points(cfg, 4, 50)
        red = reduction.reduce_first_space(p, U, rep, G, seed=7 + cfg.seed)
        fus = fusion.fuse_double(p, U + fusion.fusion_shift(p, rep), G, n, m, seed=7 + cfg.seed)
        r, _ = reduction.compare_up_to_scalar(red.coefficients(z), fus.operator.coefficients(z))
        return r
    return fn


def _fit_membership(cfg):
    p = cfg.params
    z = _points(cfg, 4, 50)
    worst = 0.0
    for n, m in AGREEMENT_REPS:
        red = reduction.reduce_first_space(p, U, FiniteRep(n, m), G, seed=7 + cfg.seed)
        red.coefficients(z)
        worst = max(worst, red.fit_residual)
    return worst


def _finite_rll(rep1, rep2, kind):
    def fn(cfg):
        return reduction.finite_rll_residual(cfg.params, U, V, FiniteRep(*rep1), FiniteRep(*rep2), kind,
                                             seed=7 + cfg.seed)
    return fn


def _fused_rll(aux, rep1, rep2):
    def fn(cfg):
        return reduction.fused_rll_residual(cfg.params, U, V, FiniteRep(*aux), FiniteRep(*rep1), FiniteRep(*rep2),
                                            seed=7 + cfg.seed)
    return fn


def _operator_rll_reduced(rep, kind):
    def fn(cfg):
        p = cfg.params
        return reduction.operator_rll_residual(p, U, FiniteRep(*rep), G, kind, _test_functions(p)[1:4],
                                               _points(cfg, 4, 51), seed=7 + cfg.seed)
    return fn


def _half_lattice(cfg):
    return max(reduction.half_lattice_residual(cfg.params, U, FiniteRep(*r), G, _points(cfg, 4, 52), 7 + cfg.seed)
               for r in [(1, 0), (0, 1)])


def _trivial(cfg):
    p = cfg.params
    z = _points(cfg, 4, 53)
    red = reduction.reduce_first_space(p, U, FiniteRep(0, 0), G, seed=7 + cfg.seed)
    co = red.coefficients(z)
    if set(co) != {(0, 0, 0)}:
        return math.inf
    v = co[(0, 0, 0)][:, 0, 0]
    one = reduction.reduce_both_spaces(p, U, FiniteRep(0, 0), FiniteRep(0, 0), seed=7 + cfg.seed).matrix
    return max(_rel(v, np.full_like(v, v[0])), 0.0 if one.shape == (1, 1) and np.isfinite(one).all() else math.inf)


REDUCTION = [
    Check("reduction.worked_generating_function", _worked("generating_function"), 1e-11),
    Check("reduction.worked_M2_eta", _worked("M2_eta"), 1e-11),
    Check("reduction.worked_theta_product", _worked("theta_product_identity"), 1e-11),
    Check("reduction.worked_AB_expansion", _worked("AB_expansion"), 1e-11),
    Check("reduction.worked_reduction_formula", _worked("reduction_formula"), 1e-10),
    Check("reduction.worked_abcd_matrix", _worked("abcd_matrix"), 1e-8),
    Check("reduction.lax_identification", _worked("lax_identification"), 1e-8,
          "reduced (1,0) operator = -lambda/2 L(u - tau/2) sigma3"),
    Check("reduction.worked_sigma3_scalar", _worked("sigma3_scalar"), 1e-10),
    Check("reduction.trivial_rep", _trivial, 1e-12, "(0,0) reduces to a scalar"),
    Check("reduction.fit_membership", _fit_membership, 1e-8, "reduced images stay in the phi span"),
] + [
    Check(f"reduction.fusion_agreement_{n}{m}", _agreement(n, m), 1e-7) for n, m in AGREEMENT_REPS
] + [
    Check("reduction.half_lattice", _half_lattice, 1e-10, "R(u - 1/2 | g + 1/2) = R(u | g) e^{(1/2) d/dz2}"),
    Check("reduction.rll_10x10_modified", _finite_rll((1, 0), (1, 0), "modified"), 1e-8),
    Check("reduction.rll_10x10_tilde", _finite_rll((1, 0), (1, 0), "tilde"), 1e-8),
    Check("reduction.rll_10x01_modified", _finite_rll((1, 0), (0, 1), "modified"), 1e-8),
    Check("reduction.rll_10x01_tilde", _finite_rll((1, 0), (0, 1), "tilde"), 1e-8),
    Check("reduction.fused_rll_10_10x01", _fused_rll((1, 0), (1, 0), (0, 1)), 1e-8,
          "reduced L = R_a1 on aux (1,0) intertwined by the reduced (1,0)x(0,1) matrix"),
    Check("reduction.fused_rll_01_10x10", _fused_rll((0, 1), (1, 0), (1, 0)), 1e-8),
    Check("reduction.operator_rll_10", _operator_rll_reduced((1, 0), "modified"), 1e-8),
    Check("reduction.operator_rll_01", _operator_rll_reduced((0, 1), "tilde"), 1e-8),
]


SUITES: Dict[str, List[Check]] = {
    "core": CORE,
    "sklyanin": SKLYANIN,
    "lax": LAX,
    "intertwiner": INTERTWINER,
    "fusion": FUSION,
    "reduction": REDUCTION,
}

EXCLUDED = {
    "intertwiner": [(INVERSION_ETA_HALF_TAU.id,
                     "Gamma(2 eta + tau) = 0, so the integral operator M(-eta - tau/2) is undefined")],
}


def suite_checks(name: str) -> List[Check]:
    if name == "all":
        return [c for s in SUITE_NAMES for c in SUITES[s]]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return list(SUITES[name])


def find_check(check_id: str) -> Check:
    if check_id == INVERSION_ETA_HALF_TAU.id:
        return INVERSION_ETA_HALF_TAU
    for checks in SUITES.values():
        for c in checks:
            if c.id == check_id:
                return c
    raise KeyError(check_id)


def run_check(check: Check, cfg: RunConfig) -> CheckResult:
    tol = cfg.tolerance_for(check.suite, check.tol)
    start = time.perf_counter()
    error = None
    try:
        res = float(check.fn(cfg))
    except Exception as exc:  # a failing check is reported, not raised
        res, error = math.inf, f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - start
    passed = bool(math.isfinite(res) and res <= tol)
    return CheckResult(check.id, res, tol, passed, seconds, error)


def run_suite(name: str, cfg: RunConfig, progress: Callable[[CheckResult], None] | None = None) -> VerificationReport:
    report = VerificationReport(name, cfg)
    for check in suite_checks(name):
        result = run_check(check, cfg)
        report.checks.append(result)
        if progress:
            progress(result)
    names = SUITE_NAMES if name == "all" else (name,)
    for s in names:
        report.excluded.extend(EXCLUDED.get(s, []))
    return report


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
