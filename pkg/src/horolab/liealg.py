"""Catalog matrix Lie algebras with exact structure constants.

A :class:`MatrixLieAlgebra` is a basis of square rational matrices together
with everything derived from it exactly: structure constants, Killing form
``B(X, Y) = tr(ad X ad Y)`` and the Cartan involution ``theta`` written in the
basis.  The catalog covers sl(n, R), so(p, q), su(p, q) (complex matrices in
their real 2n x 2n encoding) and direct sums of those.

In every catalog model the Cartan involution is ``X -> -X^T``; for su(p, q)
this holds in the real encoding because the encoding of ``Z^*`` is the
transpose of the encoding of ``Z``.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import exact
from .exact import Subspace, q, qzeros

CATALOG_ENV = "HOROLAB_CATALOG"


class CatalogError(ValueError):
    """Unknown catalog entry or parameters outside the supported range."""


class ConstructionError(RuntimeError):
    """An exact invariant failed on a built algebra: a bug, never user error."""


@dataclass(frozen=True, eq=False)
class MatrixLieAlgebra:
    name: str
    basis: tuple[np.ndarray, ...]
    structure_constants: np.ndarray  # c[i, j, k]: [X_i, X_j] = sum_k c[i, j, k] X_k
    killing: np.ndarray
    theta: np.ndarray  # theta @ x gives the coordinates of theta(X)
    a_hint: tuple[np.ndarray, ...] = ()
    h_reg_hint: tuple[Fraction, ...] = ()
    summand_of: tuple[int, ...] = ()  # summand index of each basis element
    summand_names: tuple[str, ...] = ()
    trace_ratio: tuple[Fraction, ...] = ()  # B / tr(XY) per summand
    complex_structure: np.ndarray | None = None
    descriptor: dict = field(default_factory=dict)
    _sparse: dict = field(default_factory=dict, repr=False)
    _coord_data: tuple = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix_size(self) -> int:
        return self.basis[0].shape[0]

    def ad(self, i: int) -> np.ndarray:
        """Matrix of ad(X_i): column j holds the coordinates of [X_i, X_j]."""
        return self.structure_constants[i].T

    def vector_to_matrix(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.dtype == object:
            out = qzeros(self.basis[0].shape)
            for c, b in zip(x, self.basis):
                if c != 0:
                    out = out + c * b
            return out
        return np.tensordot(x, self.float_basis, axes=(0, 0))

    @property
    def float_basis(self) -> np.ndarray:
        fb = self.__dict__.get("_float_basis")
        if fb is None:
            fb = np.array([exact.to_float(b) for b in self.basis])
            object.__setattr__(self, "_float_basis", fb)
        return fb

    @property
    def float_structure_constants(self) -> np.ndarray:
        fc = self.__dict__.get("_float_sc")
        if fc is None:
            fc = exact.to_float(self.structure_constants)
            object.__setattr__(self, "_float_sc", fc)
        return fc

    def matrix_to_vector(self, m) -> np.ndarray:
        """Exact coordinates of a rational matrix; raises if it is not in the algebra."""
        pivots, inv_sub, flat_basis = self._coord_data
        flat = np.asarray(m, dtype=object).reshape(-1)
        coords = np.array([q(flat[p]) for p in pivots], dtype=object) @ inv_sub
        if not exact.is_zero(coords @ flat_basis - flat):
            raise ValueError("matrix is not in the span of the algebra basis")
        return coords

    def killing_form(self, x, y):
        return np.asarray(x) @ self.killing @ np.asarray(y)

    def summary(self) -> dict:
        return {"name": self.name, "dim": self.dim, "matrix_size": self.matrix_size}


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    k: Subspace
    p: Subspace

    @property
    def k_basis(self) -> np.ndarray:
        return self.k.basis

    @property
    def p_basis(self) -> np.ndarray:
        return self.p.basis


# -- elementary matrices ---------------------------------------------------


def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.int64)
    m[i, j] = 1
    return m


def _complex_encode(re_part: np.ndarray, im_part: np.ndarray) -> np.ndarray:
    """Real 2n x 2n encoding of ``re + i im``: [[re, -im], [im, re]]."""
    return np.block([[re_part, -im_part], [im_part, re_part]])


@dataclass
class _Raw:
    name: str
    basis: list[np.ndarray]
    a_hint: list[np.ndarray]
    h_reg: list[Fraction]
    trace_ratio: Fraction
    complex_structure: np.ndarray | None
    descriptor: dict


def _sl(n: int) -> _Raw:
    if n < 2:
        raise CatalogError(f"sl({n},R) is not semisimple; need n >= 2")
    diag = [_unit(n, i, i) - _unit(n, i + 1, i + 1) for i in range(n - 1)]
    upper = [_unit(n, i, j) for i in range(n) for j in range(i + 1, n)]
    lower = [_unit(n, j, i) for i in range(n) for j in range(i + 1, n)]
    # decreasing weights 2^(n-1), ..., 1 centred to trace zero
    w = [Fraction(2 ** (n - 1 - i)) for i in range(n)]
    mean = sum(w) / n
    w = [x - mean for x in w]
    coords = [sum(w[: i + 1]) for i in range(n - 1)]
    return _Raw(
        name=f"sl{n}r",
        basis=diag + upper + lower,
        a_hint=diag,
        h_reg=coords,
        trace_ratio=Fraction(2 * n),
        complex_structure=None,
        descriptor={"algebra": "sl", "params": {"n": n}},
    )


def _check_pq(kind: str, p: int, q_: int) -> None:
    if q_ < 1:
        raise CatalogError(f"{kind}({p},{q_}) is compact; the catalog needs q >= 1")
    if p < q_:
        raise CatalogError(f"{kind}({p},{q_}): use the ordering p >= q, i.e. {kind}({q_},{p})")


def _so(p: int, q_: int) -> _Raw:
    _check_pq("so", p, q_)
    n = p + q_
    if n < 3:
        raise CatalogError(f"so({p},{q_}) is abelian; need p + q >= 3")
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            same_block = (i < p) == (j < p)
            sign = -1 if same_block else 1
            basis.append(_unit(n, i, j) + sign * _unit(n, j, i))
    a_hint = [_unit(n, i, p + i) + _unit(n, p + i, i) for i in range(q_)]
    return _Raw(
        name=f"so{p}{q_}",
        basis=basis,
        a_hint=a_hint,
        h_reg=[Fraction(q_ - i) for i in range(q_)],
        trace_ratio=Fraction(n - 2),
        complex_structure=None,
        descriptor={"algebra": "so", "params": {"p": p, "q": q_}},
    )


def _su(p: int, q_: int) -> _Raw:
    _check_pq("su", p, q_)
    n = p + q_
    zero = np.zeros((n, n), dtype=np.int64)
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            if (i < p) == (j < p):
                basis.append(_complex_encode(_unit(n, i, j) - _unit(n, j, i), zero))
                basis.append(_complex_encode(zero, _unit(n, i, j) + _unit(n, j, i)))
            else:
                basis.append(_complex_encode(_unit(n, i, j) + _unit(n, j, i), zero))
                basis.append(_complex_encode(zero, _unit(n, i, j) - _unit(n, j, i)))
    for k in range(n - 1):
        basis.append(_complex_encode(zero, _unit(n, k, k) - _unit(n, k + 1, k + 1)))
    a_hint = [
        _complex_encode(_unit(n, i, p + i) + _unit(n, p + i, i), zero) for i in range(q_)
    ]
    eye = np.eye(n, dtype=np.int64)
    return _Raw(
        name=f"su{p}{q_}",
        basis=basis,
        a_hint=a_hint,
        h_reg=[Fraction(q_ - i) for i in range(q_)],
        trace_ratio=Fraction(n),
        complex_structure=_complex_encode(zero, eye),
        descriptor={"algebra": "su", "params": {"p": p, "q": q_}},
    )


_NAME_PATTERNS = [
    (re.compile(r"^sl\(?(\d+)(?:,r)?\)?r?$"), "sl"),
    (re.compile(r"^su\(?(\d+),?(\d+)\)?$"), "su"),
    (re.compile(r"^so\(?(\d+),?(\d+)\)?$"), "so"),
]


def parse_name(name: str) -> dict:
    """Turn short names (``sl3r``, ``su32``, ``so(3,2)``, ``sl2r+sl2r``) into descriptors."""
    key = name.strip().lower().replace(" ", "").replace("ℝ", "r")
    extra = _user_catalog()
    if key in extra:
        return extra[key]
    parts = [s for s in re.split(r"\+|⊕", key) if s]
    if len(parts) > 1:
        return {"algebra": "sum", "summands": [parse_name(s) for s in parts]}
    for pattern, kind in _NAME_PATTERNS:
        m = pattern.match(key)
        if m:
            if kind == "sl":
                return {"algebra": "sl", "params": {"n": int(m.group(1))}}
            return {"algebra": kind, "params": {"p": int(m.group(1)), "q": int(m.group(2))}}
    raise CatalogError(f"unknown catalog algebra {name!r}")


def _user_catalog() -> dict:
    path = os.environ.get(CATALOG_ENV)
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    return {k.lower(): v for k, v in data.items()}


def _raw_from_descriptor(desc: dict) -> list[_Raw]:
    kind = desc.get("algebra")
    params = desc.get("params", {})
    if kind == "sl":
        return [_sl(int(params["n"]))]
    if kind == "so":
        return [_so(int(params["p"]), int(params["q"]))]
    if kind == "su":
        return [_su(int(params["p"]), int(params["q"]))]
    if kind == "sum":
        summands = desc.get("summands") or []
        if not summands:
            raise CatalogError("a sum descriptor needs at least one summand")
        return [r for s in summands for r in _raw_from_descriptor(s)]
    raise CatalogError(f"unknown catalog algebra kind {kind!r}")


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=np.int64)
    at = 0
    for b in blocks:
        n = b.shape[0]
        out[at : at + n, at : at + n] = b
        at += n
    return out


def build_from_catalog(spec: str | dict) -> MatrixLieAlgebra:
    """Build a catalog algebra from a short name or a JSON-style descriptor."""
    desc = parse_name(spec) if isinstance(spec, str) else dict(spec)
    raws = _raw_from_descriptor(desc)
    if len(raws) == 1:
        r = raws[0]
        alg = from_matrices(
            r.name,
            r.basis,
            a_hint=r.a_hint,
            h_reg_hint=r.h_reg,
            trace_ratio=(r.trace_ratio,),
            complex_structure=r.complex_structure,
            descriptor=desc,
        )
    else:
        sizes = [r.basis[0].shape[0] for r in raws]
        basis, a_hint, h_reg, tags = [], [], [], []
        for s, r in enumerate(raws):
            def embed(m, s=s):
                return _block_diag([m if t == s else np.zeros((sizes[t],) * 2, np.int64) for t in range(len(raws))])
            basis += [embed(b) for b in r.basis]
            a_hint += [embed(b) for b in r.a_hint]
            h_reg += r.h_reg
            tags += [s] * len(r.basis)
        alg = from_matrices(
            "+".join(r.name for r in raws),
            basis,
            a_hint=a_hint,
            h_reg_hint=h_reg,
            summand_of=tags,
            summand_names=[r.name for r in raws],
            trace_ratio=tuple(r.trace_ratio for r in raws),
            descriptor=desc,
        )
    check_algebra(alg)
    if not exact.is_positive_definite(theta_inner_product(alg)):
        raise CatalogError(f"{alg.name}: -B(X, theta Y) is not positive definite (compact or degenerate)")
    return alg


def from_matrices(
    name: str,
    basis: Sequence[np.ndarray],
    *,
    a_hint: Sequence[np.ndarray] = (),
    a_hint_coords: Sequence[np.ndarray] | None = None,
    h_reg_hint: Sequence = (),
    summand_of: Sequence[int] | None = None,
    summand_names: Sequence[str] | None = None,
    trace_ratio: Sequence[Fraction] = (),
    complex_structure: np.ndarray | None = None,
    descriptor: dict | None = None,
) -> MatrixLieAlgebra:
    """Build an algebra from a bracket-closed list of rational matrices.

    Structure constants, Killing form and ``theta = -X^T`` are computed
    exactly.  Raises :class:`ConstructionError` when the span is not closed
    under the commutator or not closed under transposition.
    """
    d = len(basis)
    if d == 0:
        raise CatalogError("empty basis")
    qbasis = [exact.qarray(b) for b in basis]
    stacked, den = exact.integer_scaled(np.array(qbasis, dtype=object))
    n = stacked.shape[1]
    flat_int = stacked.reshape(d, n * n)
    flat_q = np.array([b.reshape(-1) for b in qbasis], dtype=object)

    r, pivots = exact.rref(flat_q)
    if len(pivots) != d:
        raise CatalogError(f"{name}: basis matrices are linearly dependent")
    inv_sub = exact.inverse(flat_q[:, pivots])

    def coords_scaled(flat_int_mat, scale):
        # coordinates of (flat_int_mat / scale)
        row = np.array([[Fraction(int(flat_int_mat[p]), scale) for p in pivots]], dtype=object)
        return exact.qmatmul(row, inv_sub)[0]

    sc = qzeros((d, d, d))
    sparse: dict[int, dict[int, list]] = {i: {} for i in range(d)}
    mats = [stacked[i] for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            comm = exact.int_matmul(mats[i], mats[j]) - exact.int_matmul(mats[j], mats[i])
            flat = np.asarray(comm).reshape(-1)
            c = coords_scaled(flat, den * den)
            # closure: den * sum_k (L c_k) B_k == L * comm, all in integers
            cint, L = exact.integer_scaled(c)
            recon = exact.int_matmul(np.asarray(cint).reshape(1, d), flat_int).reshape(-1)
            ok = all(int(a) * den == int(b) * L for a, b in zip(recon, flat))
            if not ok:
                raise ConstructionError(f"{name}: span is not closed under the bracket ({i},{j})")
            sc[i, j] = c
            sc[j, i] = -c
            nz = [(k, v) for k, v in enumerate(c) if v != 0]
            if nz:
                sparse[i][j] = nz
                sparse[j][i] = [(k, -v) for k, v in nz]

    theta = qzeros((d, d))
    for i in range(d):
        t = -qbasis[i].T
        flat = t.reshape(-1)
        c = np.array([q(flat[p]) for p in pivots], dtype=object) @ inv_sub
        if not exact.is_zero(c @ flat_q - flat):
            raise ConstructionError(f"{name}: span is not closed under X -> -X^T")
        theta[:, i] = c

    killing = _killing_from_sc(sc)

    if a_hint_coords is None:
        a_coords = []
        for m in a_hint:
            flat = exact.qarray(m).reshape(-1)
            c = np.array([q(flat[p]) for p in pivots], dtype=object) @ inv_sub
            if not exact.is_zero(c @ flat_q - flat):
                raise CatalogError(f"{name}: catalog a-element is not in the algebra")
            a_coords.append(c)
    else:
        a_coords = [np.asarray(c, dtype=object) for c in a_hint_coords]

    for b in qbasis:
        b.setflags(write=False)
    return MatrixLieAlgebra(
        name=name,
        basis=tuple(qbasis),
        structure_constants=sc,
        killing=killing,
        theta=theta,
        a_hint=tuple(a_coords),
        h_reg_hint=tuple(q(x) for x in h_reg_hint),
        summand_of=tuple(summand_of) if summand_of is not None else (0,) * d,
        summand_names=tuple(summand_names) if summand_names is not None else (name,),
        trace_ratio=tuple(trace_ratio),
        complex_structure=complex_structure,
        descriptor=descriptor or {},
        _sparse=sparse,
        _coord_data=(pivots, inv_sub, flat_q),
    )


def _killing_from_sc(sc: np.ndarray) -> np.ndarray:
    d = sc.shape[0]
    ads, den = exact.integer_scaled(np.array([sc[i].T for i in range(d)], dtype=object))
    flat = ads.reshape(d, d * d)
    flat_t = np.array([ads[i].T.reshape(-1) for i in range(d)])
    kint = exact.int_matmul(flat, flat_t.T)
    out = qzeros((d, d))
    for i in range(d):
        for j in range(d):
            out[i, j] = Fraction(int(kint[i, j]), den * den)
    return out


def bracket(g: MatrixLieAlgebra, x, y) -> np.ndarray:
    """Bracket of coordinate vectors; exact for object (Fraction) input."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != (g.dim,) or y.shape != (g.dim,):
        raise ValueError(f"expected vectors of length {g.dim}, got {x.shape} and {y.shape}")
    if x.dtype == object and y.dtype == object:
        out = [Fraction(0)] * g.dim
        ynz = [(j, v) for j, v in enumerate(y) if v != 0]
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            row = g._sparse[i]
            for j, yj in ynz:
                entries = row.get(j)
                if entries:
                    s = xi * yj
                    for k, c in entries:
                        out[k] += s * c
        return np.array(out, dtype=object)
    return np.einsum("i,j,ijk->k", x.astype(float), y.astype(float), g.float_structure_constants)


def theta_inner_product(g: MatrixLieAlgebra) -> np.ndarray:
    """Gram matrix of ``B_theta(X, Y) = -B(X, theta Y)``."""
    return -(g.killing @ g.theta)


def cartan_decompose(g: MatrixLieAlgebra) -> CartanDecomposition:
    eye = exact.qeye(g.dim)
    if not exact.is_zero(g.theta @ g.theta - eye):
        raise ConstructionError(f"{g.name}: theta is not an involution")
    k = Subspace.span(exact.nullspace(g.theta - eye), g.dim)
    p = Subspace.span(exact.nullspace(g.theta + eye), g.dim)
    return CartanDecomposition(k=k, p=p)


# -- invariant checks --------------------------------------------------------


def jacobi_residual(g: MatrixLieAlgebra) -> Fraction:
    """Max |entry| of ad([X_i, X_j]) - [ad X_i, ad X_j] over all pairs (all triples at once)."""
    d = g.dim
    ads, den = exact.integer_scaled(np.array([g.ad(i) for i in range(d)], dtype=object))
    cint, den_c = exact.integer_scaled(g.structure_constants)
    # ad entries and c share a denominator up to a common multiple
    worst = Fraction(0)
    for i in range(d):
        for j in range(i + 1, d):
            lhs = exact.int_matmul(ads[i], ads[j]) - exact.int_matmul(ads[j], ads[i])
            rhs = np.tensordot(np.asarray(cint[i, j], dtype=object), ads.astype(object), axes=(0, 0))
            diff = np.asarray(lhs, dtype=object) * den_c - rhs * den
            m = max((abs(int(v)) for v in diff.reshape(-1)), default=0)
            if m:
                worst = max(worst, Fraction(m, den * den * den_c))
    return worst


def algebra_checks(g: MatrixLieAlgebra) -> dict[str, Fraction | bool]:
    """Exact residuals of every MatrixLieAlgebra invariant."""
    d = g.dim
    sc = g.structure_constants
    anti = exact.max_abs(sc + np.transpose(sc, (1, 0, 2)))
    B = g.killing
    sym = exact.max_abs(B - B.T)
    th = g.theta
    inv = Fraction(0)
    auto = Fraction(0)
    for i in range(d):
        a = g.ad(i)
        inv = max(inv, exact.max_abs(exact.qmatmul(a.T, B) + exact.qmatmul(B, a)))
        # theta ad(X_i) theta^-1 = ad(theta X_i)
        img = th[:, i]
        ad_img = np.tensordot(img, np.transpose(sc, (0, 2, 1)), axes=(0, 0))
        auto = max(auto, exact.max_abs(exact.qmatmul(th, a) - exact.qmatmul(ad_img, th)))
    inv2 = exact.max_abs(exact.qmatmul(th, th) - exact.qeye(d))
    return {
        "antisymmetry": anti,
        "jacobi": jacobi_residual(g),
        "killing_symmetric": sym,
        "killing_ad_invariant": inv,
        "theta_involution": inv2,
        "theta_automorphism": auto,
        "b_theta_positive_definite": exact.is_positive_definite(theta_inner_product(g)),
        "killing_nondegenerate": exact.det(B) != 0,
    }


def trace_form_ratios(g: MatrixLieAlgebra) -> dict[int, set]:
    """Per summand, the set of ratios B(X_i, X_j) / tr(X_i X_j) over pairs with nonzero trace."""
    ratios: dict[int, set] = {}
    mats = [exact.integer_scaled(b) for b in g.basis]
    for i in range(g.dim):
        for j in range(i, g.dim):
            (mi, di), (mj, dj) = mats[i], mats[j]
            tr = Fraction(int(np.trace(exact.int_matmul(mi, mj))), di * dj)
            bij = g.killing[i, j]
            s = g.summand_of[i]
            if tr == 0:
                if bij != 0:
                    ratios.setdefault(s, set()).add(None)
                continue
            ratios.setdefault(s, set()).add(bij / tr)
    return ratios


def check_algebra(g: MatrixLieAlgebra) -> None:
    res = algebra_checks(g)
    bad = [k for k, v in res.items() if (v is False) or (not isinstance(v, bool) and v != 0)]
    # compactness is a user-facing rejection, reported by the caller
    bad = [k for k in bad if k != "b_theta_positive_definite"]
    if "killing_nondegenerate" in bad:
        raise CatalogError(f"{g.name}: Killing form is degenerate (not semisimple)")
    if bad:
        raise ConstructionError(f"{g.name}: invariant(s) failed: {', '.join(bad)}")


def catalog_names() -> list[str]:
    return ["sl2r", "sl3r", "su21", "su31", "su32", "so21", "so32", "sl2r+sl2r"]


def descriptor_to_json(desc: dict) -> str:
    return json.dumps(desc, sort_keys=True)


def subalgebra(g: MatrixLieAlgebra, vectors: Sequence[np.ndarray], name: str, **kwargs: Any) -> MatrixLieAlgebra:
    """The matrix algebra spanned by coordinate vectors of ``g`` (must be bracket closed)."""
    mats = [g.vector_to_matrix(np.asarray(v, dtype=object)) for v in vectors]
    return from_matrices(name, mats, **kwargs)
