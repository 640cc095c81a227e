"""Exact rational linear algebra on numpy object arrays of ``Fraction``.

Everything structural in horolab (brackets, eigenspaces, subalgebras) is
decided here with zero tolerance.  Matrices are 2-d ``dtype=object`` arrays;
subspaces are stored as row bases in reduced row echelon form so that
equality and membership are plain comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

Q = Fraction

# int64 products are safe below this bound; larger inputs use python ints
_INT64_SAFE = 2**62


def q(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to ``Fraction``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def qarray(data, shape: tuple[int, ...] | None = None) -> np.ndarray:
    arr = np.array(data, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    flat = arr.reshape(-1)
    for i, x in enumerate(flat):
        flat[i] = q(x)
    return arr


def qzeros(shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(Fraction(0))
    return arr


def qeye(n: int) -> np.ndarray:
    arr = qzeros((n, n))
    for i in range(n):
        arr[i, i] = Fraction(1)
    return arr


def is_zero(arr) -> bool:
    return not any(x != 0 for x in np.asarray(arr, dtype=object).reshape(-1))


def to_float(arr) -> np.ndarray:
    return np.asarray(arr, dtype=object).astype(float)


def fmt(x: Fraction) -> str:
    x = q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_array(arr) -> list:
    arr = np.asarray(arr, dtype=object)
    if arr.ndim == 0:
        return fmt(arr.item())
    return [fmt_array(row) for row in arr]


def integer_scaled(arr) -> tuple[np.ndarray, int]:
    """Return ``(M, D)`` with ``M`` integral and ``arr == M / D``.

    ``M`` is int64 when its entries are small enough, else a python-int
    object array.  Callers multiply integer matrices instead of Fractions.
    """
    arr = np.asarray(arr, dtype=object)
    den = 1
    for x in arr.reshape(-1):
        den = lcm(den, q(x).denominator)
    ints = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = ints.reshape(-1)
    big = 0
    for i, x in enumerate(flat_in):
        x = q(x)
        v = x.numerator * (den // x.denominator)
        flat_out[i] = v
        big = max(big, abs(v))
    if big * big * max(arr.shape + (1,)) < _INT64_SAFE:
        ints = ints.astype(np.int64)
    return ints, den


def int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer product; promotes to python ints when int64 could overflow."""
    if a.dtype == np.int64 and b.dtype == np.int64:
        bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * a.shape[-1]
        if bound < _INT64_SAFE:
            return a @ b
    return a.astype(object) @ b.astype(object)


def qmatmul(a, b) -> np.ndarray:
    """Exact rational product computed as one integer product plus a division."""
    ai, da = integer_scaled(a)
    bi, db = integer_scaled(b)
    prod = np.asarray(int_matmul(ai, bi))
    den = da * db
    out = np.empty(prod.shape, dtype=object)
    flat_in = prod.reshape(-1)
    flat_out = out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = Fraction(int(v), den)
    return out


def max_abs(arr) -> Fraction:
    arr = np.asarray(arr, dtype=object).reshape(-1)
    return max((abs(q(x)) for x in arr), default=Fraction(0))


def rref(mat) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Q.  Returns ``(R, pivot_columns)``."""
    m = np.array(mat, dtype=object, copy=True)
    if m.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = None
        for i in range(r, rows):
            if m[i, c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = 1 / q(m[r, c])
        if inv != 1:
            m[r] = m[r] * inv
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i] = m[i] - m[i, c] * m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(mat) -> int:
    mat = np.asarray(mat, dtype=object)
    if mat.size == 0:
        return 0
    return len(rref(mat)[1])


def nullspace(mat, ncols: int | None = None) -> np.ndarray:
    """Row basis of ``{x : mat @ x = 0}``."""
    mat = np.asarray(mat, dtype=object)
    if mat.size == 0:
        n = ncols if ncols is not None else (mat.shape[1] if mat.ndim == 2 else 0)
        return qeye(n)
    n = mat.shape[1]
    r, pivots = rref(mat)
    free = [c for c in range(n) if c not in pivots]
    basis = qzeros((len(free), n))
    for k, f in enumerate(free):
        basis[k, f] = Fraction(1)
        for i, p in enumerate(pivots):
            basis[k, p] = -r[i, f]
    return basis


def solve(a, b) -> np.ndarray | None:
    """Exact solution of ``a @ x = b`` (vector or matrix ``b``); None if inconsistent.

    Among several solutions the one with free variables zero is returned.
    """
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    vec = b.ndim == 1
    bb = b.reshape(-1, 1) if vec else b
    n = a.shape[1]
    aug = np.concatenate([a, bb], axis=1)
    r, pivots = rref(aug)
    if any(p >= n for p in pivots):
        return None
    x = qzeros((n, bb.shape[1]))
    for i, p in enumerate(pivots):
        x[p] = r[i, n:]
    return x[:, 0] if vec else x


def inverse(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    n = a.shape[0]
    x = solve(a, qeye(n))
    if x is None or rank(a) < n:
        raise np.linalg.LinAlgError("matrix is singular over Q")
    return x


def det(a) -> Fraction:
    m = np.array(a, dtype=object, copy=True)
    n = m.shape[0]
    out = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i, c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
            out = -out
        out *= m[c, c]
        for i in range(c + 1, n):
            if m[i, c] != 0:
                m[i] = m[i] - (m[i, c] / m[c, c]) * m[c]
    return out


def leading_minors(a) -> list[Fraction]:
    """All leading principal minors, via pivot products of unpivoted elimination."""
    m = np.array(a, dtype=object, copy=True)
    n = m.shape[0]
    minors = []
    acc = Fraction(1)
    for c in range(n):
        if m[c, c] == 0:
            # a zero pivot means this minor vanishes; fall back to direct dets
            minors.extend(det(a[: k + 1, : k + 1]) for k in range(c, n))
            return minors
        acc *= m[c, c]
        minors.append(acc)
        for i in range(c + 1, n):
            if m[i, c] != 0:
                m[i] = m[i] - (m[i, c] / m[c, c]) * m[c]
    return minors


def is_positive_definite(a) -> bool:
    a = np.asarray(a, dtype=object)
    if a.shape[0] == 0:
        return True
    if any(a[i, j] != a[j, i] for i in range(a.shape[0]) for j in range(i)):
        return False
    return all(m > 0 for m in leading_minors(a))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of Q^n held as an RREF row basis.

    Two ``Subspace`` objects are equal exactly when their RREF bases agree,
    which makes subspace equality an exact test.
    """

    basis: np.ndarray
    pivots: tuple[int, ...]
    ambient: int

    @classmethod
    def span(cls, vectors, ambient: int | None = None) -> "Subspace":
        vecs = [np.asarray(v, dtype=object) for v in vectors]
        if not vecs:
            if ambient is None:
                raise ValueError("ambient dimension needed for the zero subspace")
            return cls(qzeros((0, ambient)), (), ambient)
        m = np.array(vecs, dtype=object)
        n = m.shape[1]
        r, piv = rref(m)
        return cls(r, tuple(piv), n)

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(qzeros((0, ambient)), (), ambient)

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls(qeye(ambient), tuple(range(ambient)), ambient)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v) -> np.ndarray:
        """Residual of ``v`` after elimination against the basis (zero iff v is inside)."""
        v = np.array(v, dtype=object, copy=True)
        for row, p in zip(self.basis, self.pivots):
            if v[p] != 0:
                v = v - v[p] * row
        return v

    def contains(self, v) -> bool:
        return is_zero(self.reduce(v))

    def coordinates(self, v) -> np.ndarray:
        """Coefficients of ``v`` in the RREF basis; raises if ``v`` is outside."""
        if not self.contains(v):
            raise ValueError("vector is not in the subspace")
        return np.array([q(v[p]) for p in self.pivots], dtype=object)

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.pivots == other.pivots
            and all(x == y for x, y in zip(self.basis.reshape(-1), other.basis.reshape(-1)))
        )

    def __hash__(self):
        return hash((self.ambient, self.pivots, tuple(self.basis.reshape(-1))))

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(list(self.basis) + list(other.basis), self.ambient)

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient)
        # x U = y V  <=>  [U; -V]^T (x, y) = 0
        stacked = np.concatenate([self.basis, -other.basis], axis=0).T
        ker = nullspace(stacked)
        vecs = [k[: self.dim] @ self.basis for k in ker]
        return Subspace.span(vecs, self.ambient)

    def orthocomplement(self, gram, within: "Subspace | None" = None) -> "Subspace":
        """Complement w.r.t. the bilinear form ``gram``, optionally inside ``within``."""
        within = within or Subspace.full(self.ambient)
        if self.dim == 0:
            return within
        w = within.basis
        cond = self.basis @ np.asarray(gram, dtype=object) @ w.T
        ker = nullspace(cond)
        return Subspace.span([k @ w for k in ker], self.ambient)


def direct_sum_ok(parts: Sequence[Subspace]) -> bool:
    """True iff the subspaces are independent (their sum has the summed dimension)."""
    if not parts:
        return True
    total = sum(p.dim for p in parts)
    ambient = parts[0].ambient
    return Subspace.span([v for p in parts for v in p.basis], ambient).dim == total


def stack(vectors: Iterable, ncols: int) -> np.ndarray:
    vecs = list(vectors)
    if not vecs:
        return qzeros((0, ncols))
    return np.array(vecs, dtype=object)
