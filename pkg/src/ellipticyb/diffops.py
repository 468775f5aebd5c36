"""Finite-difference operators with meromorphic coefficients.

An operator is a finite sum ``sum_s c_s(z) e^{s d/dz}`` where every shift ``s`` is
stored exactly as an integer triple ``(a, b, c)`` meaning ``a*eta + b*tau/2 + c/2``.
Coefficients are vectorised callables ``z -> complex``.  Composition, sums, scalar
multiples and Gaussian conjugation are closed operations; matrices of operators
are handled by :class:`OperatorMatrix`.
"""
from __future__ import annotations

from typing import Callable, Dict, Iterable, Tuple

import numpy as np

from .core import ModularParams

Shift = Tuple[int, int, int]
Coeff = Callable[[np.ndarray], np.ndarray]

ZERO: Shift = (0, 0, 0)


def residual(lhs: "DifferenceOperator", rhs: "DifferenceOperator", f: Callable, z) -> float:
    """Largest ``|lhs f - rhs f|`` divided by the pointwise term scale of both sides."""
    a, sa = lhs.apply_with_scale(f, z)
    b, sb = rhs.apply_with_scale(f, z)
    scale = np.maximum(np.maximum(sa, sb), 1e-300)
    return float(np.max(np.abs(a - b) / scale))

__all__ = [
    "residual",
    "DifferenceOperator",
    "OperatorMatrix",
    "MatrixOperator",
    "ZERO",
    "constant",
    "multiplication",
    "shift_op",
]


def _add_shift(s: Shift, t: Shift) -> Shift:
    return (s[0] + t[0], s[1] + t[1], s[2] + t[2])


def _const(value: complex) -> Coeff:
    value = complex(value)
    return lambda z: np.full(np.shape(z), value, dtype=complex)


def _sum(fs):
    fs = tuple(fs)
    if len(fs) == 1:
        return fs[0]
    return lambda z: sum(f(z) for f in fs)


class DifferenceOperator:
    """Sum of coefficient-times-shift terms acting on functions of one variable.

    ``var`` selects which argument of a multi-variable function the operator acts
    on; see :meth:`apply`.
    """

    __slots__ = ("params", "terms", "var")

    def __init__(self, params: ModularParams, terms: Dict[Shift, Coeff] | None = None, var: int = 0):
        self.params = params
        self.terms: Dict[Shift, Coeff] = dict(terms or {})
        self.var = var

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, params, var=0):
        return cls(params, {}, var)

    @classmethod
    def identity(cls, params, var=0):
        return cls(params, {ZERO: _const(1.0)}, var)

    def shifts(self):
        return sorted(self.terms)

    def shift_value(self, key: Shift) -> complex:
        return self.params.shift(key)

    def coefficient(self, key: Shift) -> Coeff:
        return self.terms.get(key, _const(0.0))

    # algebra -----------------------------------------------------------------
    def _check(self, other: "DifferenceOperator"):
        if other.params is not self.params and other.params != self.params:
            raise ValueError("operators built with different modular parameters")
        if other.var != self.var:
            raise ValueError("operators act on different variables")

    def __add__(self, other):
        if not isinstance(other, DifferenceOperator):
            other = constant(self.params, other, self.var)
        self._check(other)
        terms: Dict[Shift, list] = {}
        for op in (self, other):
            for k, c in op.terms.items():
                terms.setdefault(k, []).append(c)
        return DifferenceOperator(self.params, {k: _sum(v) for k, v in terms.items()}, self.var)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, DifferenceOperator) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: complex):
        factor = complex(factor)
        return DifferenceOperator(
            self.params, {k: (lambda z, c=c: factor * c(z)) for k, c in self.terms.items()}, self.var
        )

    def __mul__(self, factor):
        if isinstance(factor, DifferenceOperator):
            raise TypeError("use @ to compose operators")
        return self.scale(factor)

    __rmul__ = __mul__

    def compose(self, other: "DifferenceOperator") -> "DifferenceOperator":
        """``self o other``: first apply ``other``, then ``self``."""
        self._check(other)
        terms: Dict[Shift, list] = {}
        for s, a in self.terms.items():
            sv = self.shift_value(s)
            for t, b in other.terms.items():
                terms.setdefault(_add_shift(s, t), []).append(
                    lambda z, a=a, b=b, sv=sv: a(z) * b(z + sv)
                )
        return DifferenceOperator(self.params, {k: _sum(v) for k, v in terms.items()}, self.var)

    def __matmul__(self, other):
        return self.compose(other)

    def gaussian_conjugate(self, c: complex) -> "DifferenceOperator":
        """``e^{c pi i z^2} o self o e^{-c pi i z^2}``, folded into the coefficients."""
        c = complex(c)
        terms = {}
        for k, a in self.terms.items():
            s = self.shift_value(k)
            terms[k] = lambda z, a=a, s=s: a(z) * np.exp(-1j * np.pi * c * (2 * z * s + s * s))
        return DifferenceOperator(self.params, terms, self.var)

    # evaluation ----------------------------------------------------------
    def apply(self, f: Callable, z):
        """Evaluate ``(self f)(z)``.

        ``z`` is either an array of points, in which case ``f(z)`` is called, or a
        tuple of arrays, in which case ``f(*z)`` is called and only component
        ``var`` is shifted.
        """
        if isinstance(z, tuple):
            zv = np.asarray(z[self.var], dtype=complex)
            out = 0
            for k, a in self.terms.items():
                s = self.shift_value(k)
                args = list(z)
                args[self.var] = zv + s
                out = out + a(zv) * f(*args)
            return out + np.zeros(np.broadcast(*z).shape, dtype=complex)
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for k, a in self.terms.items():
            out = out + a(z) * f(z + self.shift_value(k))
        return out

    def apply_with_scale(self, f: Callable, z):
        """Return ``(self f)(z)`` together with ``sum_s |c_s(z) f(z+s)|``.

        The second array measures cancellation and serves as the natural scale
        for residuals of identities whose two sides nearly vanish.
        """
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        scale = np.zeros(z.shape)
        for k, a in self.terms.items():
            t = a(z) * f(z + self.shift_value(k))
            out = out + t
            scale = scale + np.abs(t)
        return out, scale

    def __call__(self, f, z):
        return self.apply(f, z)

    def restrict(self, basis: Iterable[Callable], points) -> np.ndarray:
        """Values of ``self`` applied to each basis function at ``points``; shape (npts, nbasis)."""
        return np.stack([self.apply(b, points) for b in basis], axis=-1)

    def __repr__(self):
        keys = ", ".join(str(k) for k in self.shifts())
        return f"DifferenceOperator(var={self.var}, shifts=[{keys}])"


def constant(params, value, var=0) -> DifferenceOperator:
    return DifferenceOperator(params, {ZERO: _const(value)}, var)


def multiplication(params, func: Coeff, var=0) -> DifferenceOperator:
    """Operator of multiplication by ``func(z)``."""
    return DifferenceOperator(params, {ZERO: func}, var)


def shift_op(params, key: Shift, coeff: Coeff | complex = 1.0, var=0) -> DifferenceOperator:
    c = coeff if callable(coeff) else _const(coeff)
    return DifferenceOperator(params, {tuple(key): c}, var)


class OperatorMatrix:
    """Rectangular matrix whose entries are :class:`DifferenceOperator` objects."""

    __array_ufunc__ = None  # let numpy defer to __rmatmul__

    def __init__(self, entries):
        self.entries = [list(row) for row in entries]
        self.shape = (len(self.entries), len(self.entries[0]) if self.entries else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def params(self):
        return self.entries[0][0].params

    def matmul(self, other: "OperatorMatrix | np.ndarray") -> "OperatorMatrix":
        """Matrix product; numeric matrices are accepted on either side."""
        if isinstance(other, np.ndarray):
            return self.matmul(OperatorMatrix.from_numeric(self.params, other, self.entries[0][0].var))
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = None
                for r in range(k):
                    term = self.entries[i][r] @ other.entries[r][j]
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return OperatorMatrix(out)

    def __matmul__(self, other):
        return self.matmul(other)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return OperatorMatrix.from_numeric(self.params, other, self.entries[0][0].var).matmul(self)
        return NotImplemented

    def __add__(self, other: "OperatorMatrix"):
        return OperatorMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def scale(self, factor):
        return OperatorMatrix([[a.scale(factor) for a in row] for row in self.entries])

    def gaussian_conjugate(self, c):
        return OperatorMatrix([[a.gaussian_conjugate(c) for a in row] for row in self.entries])

    @classmethod
    def from_numeric(cls, params, mat, var=0):
        mat = np.asarray(mat, dtype=complex)
        return cls([[constant(params, x, var) for x in row] for row in mat])

    def kron_left(self, mat) -> "OperatorMatrix":
        """``mat (x) self``: numeric matrix acting on the outer index."""
        mat = np.asarray(mat, dtype=complex)
        a, b = mat.shape
        n, m = self.shape
        rows = []
        for i in range(a):
            for r in range(n):
                rows.append([self.entries[r][s].scale(mat[i, j]) for j in range(b) for s in range(m)])
        return OperatorMatrix(rows)

    def kron_right(self, mat) -> "OperatorMatrix":
        """``self (x) mat``: numeric matrix acting on the inner index."""
        mat = np.asarray(mat, dtype=complex)
        a, b = mat.shape
        n, m = self.shape
        rows = []
        for r in range(n):
            for i in range(a):
                rows.append([self.entries[r][s].scale(mat[i, j]) for s in range(m) for j in range(b)])
        return OperatorMatrix(rows)

    def apply(self, f: Callable, z) -> np.ndarray:
        """Apply every entry to the scalar function ``f``; result shape ``shape + z.shape``."""
        return np.array([[e.apply(f, z) for e in row] for row in self.entries])

    def apply_vector(self, fs, z) -> np.ndarray:
        """``(M F)_i = sum_j M_ij f_j`` for a column of functions ``fs``."""
        return np.array([sum(e.apply(f, z) for e, f in zip(row, fs)) for row in self.entries])


def memoize_points(fn: Callable) -> Callable:
    """Cache ``fn(z)`` on the exact bytes of ``z``; for expensive fitted coefficients."""
    cache = {}

    def wrapped(z):
        z = np.asarray(z, dtype=complex)
        key = (z.shape, z.tobytes())
        if key not in cache:
            cache[key] = fn(z)
        return cache[key]

    return wrapped


class MatrixOperator:
    """``sum_s C_s(z) e^{s d/dz}`` with ``d x d`` matrix coefficients.

    ``terms`` maps a shift triple to a callable taking a 1-d array of points and
    returning an array of shape ``(len(z), d, d)``.  This is the dense
    counterpart of :class:`OperatorMatrix` and is much cheaper to compose and
    evaluate when the coefficients come from numerical fits.
    """

    __array_ufunc__ = None

    def __init__(self, params: ModularParams, dim: int, terms: Dict[Shift, Callable]):
        self.params = params
        self.dim = dim
        self.terms = dict(terms)

    def shifts(self):
        return sorted(self.terms)

    def coefficients(self, z) -> Dict[Shift, np.ndarray]:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return {k: c(z) for k, c in self.terms.items()}

    @classmethod
    def from_numeric(cls, params, mat):
        mat = np.asarray(mat, dtype=complex)
        return cls(params, mat.shape[0], {ZERO: lambda z: np.broadcast_to(mat, (len(z),) + mat.shape)})

    @classmethod
    def from_operator_matrix(cls, om: OperatorMatrix):
        n, m = om.shape
        if n != m:
            raise ValueError("operator matrix must be square")
        keys = set()
        for row in om.entries:
            for e in row:
                keys |= set(e.terms)
        zero = lambda z: np.zeros(np.shape(z), dtype=complex)

        def coeff(key):
            def f(z):
                out = np.empty((len(z), n, n), dtype=complex)
                for i in range(n):
                    for j in range(n):
                        out[:, i, j] = om.entries[i][j].terms.get(key, zero)(z)
                return out
            return f

        return cls(om.params, n, {k: coeff(k) for k in keys})

    def _shift(self, key):
        return self.params.shift(key)

    def matmul(self, other) -> "MatrixOperator":
        """Composition ``self o other``; numeric matrices are promoted."""
        if not isinstance(other, MatrixOperator):
            other = MatrixOperator.from_numeric(self.params, other)
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        terms: Dict[Shift, list] = {}
        for s, a in self.terms.items():
            sv = self._shift(s)
            for t, b in other.terms.items():
                terms.setdefault(_add_shift(s, t), []).append(
                    lambda z, a=a, b=b, sv=sv: a(z) @ b(z + sv)
                )
        return MatrixOperator(self.params, self.dim, {k: memoize_points(_sum(v)) for k, v in terms.items()})

    def __matmul__(self, other):
        return self.matmul(other)

    def __rmatmul__(self, other):
        return MatrixOperator.from_numeric(self.params, other).matmul(self)

    def scale(self, factor) -> "MatrixOperator":
        return MatrixOperator(self.params, self.dim,
                              {k: (lambda z, c=c: factor * c(z)) for k, c in self.terms.items()})

    def kron(self, left=None, right=None) -> "MatrixOperator":
        """``left (x) self (x) right`` for identity-like numeric factors."""
        left = np.eye(1) if left is None else np.asarray(left, dtype=complex)
        right = np.eye(1) if right is None else np.asarray(right, dtype=complex)
        dim = left.shape[0] * self.dim * right.shape[0]

        def wrap(c):
            def f(z):
                v = c(z)
                return np.stack([np.kron(np.kron(left, x), right) for x in v])
            return f

        return MatrixOperator(self.params, dim, {k: wrap(c) for k, c in self.terms.items()})

    def embed(self, outer: int, inner: int) -> "MatrixOperator":
        """``I_outer (x) self (x) I_inner`` on a tensor product with the given identities."""
        return self.kron(np.eye(outer), np.eye(inner))

    def permuted(self, perm) -> "MatrixOperator":
        """Conjugate by a permutation matrix given as an index array."""
        perm = np.asarray(perm)
        return MatrixOperator(self.params, self.dim,
                              {k: (lambda z, c=c: c(z)[:, perm][:, :, perm]) for k, c in self.terms.items()})

    def apply(self, f: Callable, z) -> np.ndarray:
        """``sum_s C_s(z) f(z + s)`` for scalar ``f``; shape ``(len(z), d, d)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros((len(z), self.dim, self.dim), dtype=complex)
        for k, c in self.terms.items():
            out += c(z) * f(z + self._shift(k))[:, None, None]
        return out

    def apply_vector(self, fs, z) -> np.ndarray:
        """``(M F)_i = sum_j M_ij f_j`` for a column of functions; shape ``(len(z), d)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros((len(z), self.dim), dtype=complex)
        for k, c in self.terms.items():
            vals = np.stack([f(z + self._shift(k)) for f in fs], axis=-1)
            out += np.einsum("zij,zj->zi", c(z), vals)
        return out

    def __repr__(self):
        return f"MatrixOperator(dim={self.dim}, shifts={self.shifts()})"
