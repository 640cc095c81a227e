"""The symmetric space realized as the solvable group AN with a left-invariant metric.

Algebra-level data (metric, Levi-Civita coefficients, orbit second fundamental
forms) is exact.  Group elements are floating matrices in the defining
representation of g.  Vectors in ``a + n`` are coordinate vectors with respect
to ``model.an_basis``; tangent vectors at a group element ``p`` are always
left-trivialized, i.e. expressed as ``p^-1 dp``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from . import exact
from .exact import Subspace
from .liealg import MatrixLieAlgebra, bracket
from .parabolic import ParabolicData
from .rootspace import Root, RootSpaceDecomposition


class LogRangeError(ValueError):
    """group_log was asked for an element outside the validated range."""


class MembershipError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


# log(I + Z) by power series is used below this norm, scipy.linalg.logm above
_SERIES_RADIUS = 0.25


@dataclass(frozen=True, eq=False)
class SolvableModel:
    rd: RootSpaceDecomposition
    an_basis: tuple[np.ndarray, ...]  # g-coordinates; a-basis first, then root spaces
    blocks: tuple[tuple[Root | None, int, int], ...]  # (root or None for a, start, stop)
    structure: np.ndarray  # c[i, j, k] inside a + n, exact
    metric: np.ndarray  # exact Gram matrix
    metric_inv: np.ndarray
    conn: np.ndarray  # Gamma[i, j, k]: nabla_{e_i} e_j = sum_k Gamma[i, j, k] e_k
    rep_dim: int
    _coord: tuple = field(repr=False, default=())
    _float: dict = field(repr=False, default_factory=dict)

    @property
    def g(self) -> MatrixLieAlgebra:
        return self.rd.g

    @property
    def dim(self) -> int:
        return len(self.an_basis)

    # ---- exact coordinate conversion -------------------------------------

    def to_an(self, v) -> np.ndarray:
        """a + n coordinates of a g-coordinate vector lying in a + n."""
        pivots, tinv, span = self._coord
        v = np.asarray(v, dtype=object)
        if not span.contains(v):
            raise ValueError("vector is not in a + n")
        return np.array([v[p] for p in pivots], dtype=object) @ tinv

    def to_g(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=object)
        return sum((c * b for c, b in zip(x, self.an_basis) if c != 0), exact.qzeros(self.g.dim))

    def subspace(self, s: Subspace) -> Subspace:
        """A g-subspace inside a + n, re-expressed in a + n coordinates."""
        return Subspace.span([self.to_an(v) for v in s.basis], self.dim)

    def block_slice(self, root: Root | None) -> slice:
        for r, lo, hi in self.blocks:
            if r == (tuple(root) if root is not None else None):
                return slice(lo, hi)
        raise KeyError(f"no block for root {root}")

    # ---- exact algebra on a + n ------------------------------------------

    def bracket(self, x, y) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        if x.dtype == object or y.dtype == object:
            return np.tensordot(np.tensordot(np.asarray(x, dtype=object), self.structure, axes=(0, 0)), np.asarray(y, dtype=object), axes=(0, 0))
        return np.einsum("...i,...j,ijk->...k", x, y, self.float_structure)

    def inner(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        if x.dtype == object or y.dtype == object:
            return np.asarray(x, dtype=object) @ self.metric @ np.asarray(y, dtype=object)
        return np.einsum("...i,ij,...j->...", x, self.float_metric, y)

    def nabla(self, x, y) -> np.ndarray:
        """nabla_X Y for left-invariant fields X, Y."""
        x = np.asarray(x)
        y = np.asarray(y)
        if x.dtype == object or y.dtype == object:
            return np.tensordot(np.tensordot(np.asarray(x, dtype=object), self.conn, axes=(0, 0)), np.asarray(y, dtype=object), axes=(0, 0))
        return np.einsum("...i,...j,ijk->...k", x, y, self.float_conn)

    def nabla_sym(self, x, y) -> np.ndarray:
        return (self.nabla(x, y) + self.nabla(y, x)) / 2

    def curvature(self, x, y, z) -> np.ndarray:
        """R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z."""
        return self.nabla(x, self.nabla(y, z)) - self.nabla(y, self.nabla(x, z)) - self.nabla(self.bracket(x, y), z)

    def sectional_curvature(self, x, y):
        num = self.inner(self.curvature(x, y, y), x)
        den = self.inner(x, x) * self.inner(y, y) - self.inner(x, y) ** 2
        if den == 0:
            raise ValueError("vectors are linearly dependent")
        return num / den

    def ricci(self) -> np.ndarray:
        """Ricci tensor Ric(e_i, e_j) = tr(Z -> R(Z, e_i) e_j), floating."""
        m = self.dim
        eye = np.eye(m)
        ric = np.zeros((m, m))
        for i in range(m):
            for j in range(m):
                rz = self.curvature(eye, np.broadcast_to(eye[i], (m, m)), np.broadcast_to(eye[j], (m, m)))
                ric[i, j] = np.trace(rz)
        return ric

    def scalar_curvature(self) -> float:
        return float(np.sum(self.float_metric_inv * self.ricci()))

    # ---- floating data ---------------------------------------------------

    def _cache(self, key, build):
        val = self._float.get(key)
        if val is None:
            val = build()
            self._float[key] = val
        return val

    @property
    def float_structure(self) -> np.ndarray:
        return self._cache("c", lambda: exact.to_float(self.structure))

    @property
    def float_metric(self) -> np.ndarray:
        return self._cache("G", lambda: exact.to_float(self.metric))

    @property
    def float_metric_inv(self) -> np.ndarray:
        return self._cache("Ginv", lambda: exact.to_float(self.metric_inv))

    @property
    def float_conn(self) -> np.ndarray:
        return self._cache("Gamma", lambda: exact.to_float(self.conn))

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular L with G = L L^T; x -> L^T x maps to orthonormal coordinates."""
        return self._cache("L", lambda: np.linalg.cholesky(self.float_metric))

    @property
    def mats(self) -> np.ndarray:
        """Representation matrices of the a + n basis, shape (m, n, n)."""
        return self._cache("mats", lambda: np.array([self.g.vector_to_matrix(exact.to_float(b)) for b in self.an_basis]))

    @property
    def _flat_pinv(self) -> np.ndarray:
        return self._cache("pinv", lambda: np.linalg.pinv(self.mats.reshape(self.dim, -1)))

    def matrix(self, x) -> np.ndarray:
        """Representation matrix of a + n coordinates (batched over leading axes)."""
        return np.tensordot(np.asarray(x, dtype=float), self.mats, axes=(-1, 0))

    def coords_of_matrix(self, mat) -> tuple[np.ndarray, np.ndarray]:
        """Least-squares a + n coordinates of matrices and the size of the off-span part."""
        mat = np.asarray(mat)
        flat = mat.reshape(mat.shape[:-2] + (-1,))
        x = flat @ self._flat_pinv
        off = flat - x @ self.mats.reshape(self.dim, -1)
        return x, np.linalg.norm(off, axis=-1)

    def norm(self, x) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(np.asarray(x, dtype=float), np.asarray(x, dtype=float)), 0.0))

    def orthonormal_basis(self, s: Subspace) -> np.ndarray:
        """Float orthonormal basis (rows, a + n coordinates) of an a + n subspace."""
        if s.dim == 0:
            return np.zeros((0, self.dim))
        b = exact.to_float(s.basis)
        gram = b @ self.float_metric @ b.T
        lt = np.linalg.cholesky(gram)
        return np.linalg.solve(lt, b)

    # ---- symmetric-space data -------------------------------------------

    @property
    def p_map(self) -> np.ndarray:
        """Float matrices of (X - theta X)/2 for the basis, shape (m, n, n)."""

        def build():
            g = self.g
            out = []
            for b in self.an_basis:
                pv = (b - g.theta @ b) / 2
                out.append(g.vector_to_matrix(exact.to_float(pv)))
            return np.array(out)

        return self._cache("pmap", build)

    @property
    def iwasawa_projection(self) -> np.ndarray:
        """Float map g-coordinates -> a + n coordinates along k (g = k + a + n)."""

        def build():
            g = self.g
            kb = list(self.rd.cartan.k.basis)
            full = np.array(kb + list(self.an_basis), dtype=object)  # rows
            inv = exact.inverse(full.T)
            return exact.to_float(inv[len(kb):, :])

        return self._cache("iwproj", build)

    @property
    def g_pinv(self) -> np.ndarray:
        return self._cache("gpinv", lambda: np.linalg.pinv(self.g.float_basis.reshape(self.g.dim, -1)))

    @property
    def triangular_frame(self) -> np.ndarray:
        """Orthogonal T such that T^T (AN) T is upper triangular with positive diagonal."""
        return self._cache("T", lambda: _triangular_frame(self))


def _triangular_frame(model: SolvableModel) -> np.ndarray:
    rd = model.rd
    a_mats = model.mats[: rd.rank]
    hreg = np.tensordot(np.array([float(x) for x in rd.h_reg]), a_mats, axes=(0, 0))
    mu, vecs = np.linalg.eigh(hreg)
    # generic a-element splits weight spaces that H_reg leaves degenerate
    weights = np.array([math.sqrt(2 + k) for k in range(rd.rank)])
    generic = np.tensordot(weights, a_mats, axes=(0, 0))
    cols = []
    order = np.argsort(-mu, kind="stable")
    mu, vecs = mu[order], vecs[:, order]
    i = 0
    while i < len(mu):
        j = i
        while j < len(mu) and abs(mu[j] - mu[i]) < 1e-9 * max(1.0, abs(mu[i])):
            j += 1
        block = vecs[:, i:j]
        w, u = np.linalg.eigh(block.T @ generic @ block)
        cols.append(block @ u[:, np.argsort(-w, kind="stable")])
        i = j
    t = np.concatenate(cols, axis=1)
    conj = np.einsum("ji,mjk,kl->mil", t, model.mats, t)
    lower = np.tril(conj[rd.rank:], k=0)
    offdiag_a = conj[: rd.rank] - np.einsum("mii->mi", conj[: rd.rank])[:, :, None] * np.eye(t.shape[0])
    if np.abs(lower).max(initial=0) > 1e-10 or np.abs(offdiag_a).max(initial=0) > 1e-10:
        raise RuntimeError("could not bring AN to upper triangular form")
    return t


def build_model(rd: RootSpaceDecomposition) -> SolvableModel:
    g = rd.g
    an_basis = list(rd.a_basis)
    blocks: list[tuple[Root | None, int, int]] = [(None, 0, len(an_basis))]
    for alpha in sorted(rd.positive_roots, key=lambda r: (sum(rd.simple_coefficients(r)), tuple(-x for x in rd.simple_coefficients(r)))):
        lo = len(an_basis)
        an_basis.extend(rd.root_spaces[alpha].basis)
        blocks.append((alpha, lo, len(an_basis)))
    m = len(an_basis)
    span = Subspace.span(an_basis, g.dim)
    pivots = span.pivots
    tmat = np.array([[b[p] for p in pivots] for b in an_basis], dtype=object)
    tinv = exact.inverse(tmat)

    def coords(v):
        if not span.contains(v):
            raise ValueError("a + n is not closed under the bracket")
        return np.array([v[p] for p in pivots], dtype=object) @ tinv

    c = exact.qzeros((m, m, m))
    for i, j in itertools.combinations(range(m), 2):
        v = coords(bracket(g, an_basis[i], an_basis[j]))
        c[i, j] = v
        c[j, i] = -v

    # <H, H'> = B on a, -B(X, theta Y)/2 on n, a and n orthogonal
    btheta = -exact.qmatmul(g.killing, g.theta)
    E = np.array(an_basis, dtype=object)
    full = exact.qmatmul(exact.qmatmul(E, btheta), E.T)
    r = rd.rank
    metric = exact.qzeros((m, m))
    metric[:r, :r] = exact.qmatmul(exact.qmatmul(E[:r], g.killing), E[:r].T)
    metric[r:, r:] = full[r:, r:] / 2
    if not exact.is_positive_definite(metric):
        raise RuntimeError(f"{g.name}: metric on a + n is not positive definite")
    ginv = exact.inverse(metric)

    # C[i, j, l] = <[e_i, e_j], e_l>;  <nabla_i e_j, e_l> = (C_ijl - C_jli + C_lij) / 2
    C = np.tensordot(c, metric, axes=(2, 0))
    K = (C - np.transpose(C, (2, 0, 1)) + np.transpose(C, (1, 2, 0))) / 2
    gamma = np.tensordot(K, ginv, axes=(2, 0))
    return SolvableModel(
        rd=rd,
        an_basis=tuple(an_basis),
        blocks=tuple(blocks),
        structure=c,
        metric=metric,
        metric_inv=ginv,
        conn=gamma,
        rep_dim=g.matrix_size,
        _coord=(pivots, tinv, span),
    )


def model_checks(model: SolvableModel) -> dict[str, bool]:
    """Exact self-checks of the metric and the Koszul connection."""
    m = model.dim
    G, gamma, c = model.metric, model.conn, model.structure
    K = np.tensordot(gamma, G, axes=(2, 0))
    out = {}
    out["metric_symmetric"] = all(G[i, j] == G[j, i] for i in range(m) for j in range(i))
    out["metric_positive_definite"] = exact.is_positive_definite(G)
    out["metric_compatible"] = exact.is_zero(K + np.transpose(K, (0, 2, 1)))
    out["torsion_free"] = exact.is_zero(gamma - np.transpose(gamma, (1, 0, 2)) - c)
    g = model.g
    pimg = [(b - g.theta @ b) / 2 for b in model.an_basis]
    P = np.array(pimg, dtype=object)
    out["isometry_to_p"] = exact.is_zero(exact.qmatmul(exact.qmatmul(P, g.killing), P.T) - G)
    out["a_flat"] = exact.is_zero(gamma[: model.rd.rank, : model.rd.rank])
    return out


# ---- algebraic orbit geometry ------------------------------------------


@dataclass(frozen=True)
class OrbitGeometry:
    subalg: Subspace  # a + n coordinates
    normal: Subspace
    second_fundamental_form: np.ndarray  # II[i, j] for the subalg basis, exact
    mean_curvature: np.ndarray  # exact a + n vector

    @property
    def codim(self) -> int:
        return self.normal.dim

    @property
    def totally_geodesic(self) -> bool:
        return exact.is_zero(self.second_fundamental_form)


def normal_projector(model: SolvableModel, s: Subspace) -> np.ndarray:
    """Exact matrix P (acting on column vectors) of the metric-orthogonal projection onto s^perp."""
    m = model.dim
    if s.dim == 0:
        return exact.qeye(m)
    B = s.basis
    gram = exact.qmatmul(exact.qmatmul(B, model.metric), B.T)
    # tangent part of v: B^T gram^-1 B G v
    tan = exact.qmatmul(exact.qmatmul(exact.qmatmul(B.T, exact.inverse(gram)), B), model.metric)
    return exact.qeye(m) - tan


def orbit_second_fundamental_form(model: SolvableModel, subalg: Subspace) -> OrbitGeometry:
    """II(X, Y) = (nabla_X Y)^perp for left-invariant fields along a subgroup orbit."""
    m = model.dim
    if subalg.ambient != m:
        raise ValueError("subalgebra must be given in a + n coordinates")
    for x, y in itertools.combinations(subalg.basis, 2):
        if not subalg.contains(model.bracket(x, y)):
            raise ValueError("subspace is not closed under the bracket")
    P = normal_projector(model, subalg)
    d = subalg.dim
    ii = exact.qzeros((d, d, m))
    for i in range(d):
        for j in range(i, d):
            v = P @ model.nabla_sym(subalg.basis[i], subalg.basis[j])
            ii[i, j] = v
            ii[j, i] = v
    if d:
        gram = exact.qmatmul(exact.qmatmul(subalg.basis, model.metric), subalg.basis.T)
        ginv = exact.inverse(gram)
        H = np.tensordot(ginv, ii, axes=([0, 1], [0, 1]))
    else:
        H = exact.qzeros(m)
    normal = subalg.orthocomplement(model.metric)
    return OrbitGeometry(subalg=subalg, normal=normal, second_fundamental_form=ii, mean_curvature=H)


def totally_geodesic_test(model: SolvableModel, subalg: Subspace) -> bool:
    return orbit_second_fundamental_form(model, subalg).totally_geodesic


@dataclass(frozen=True, eq=False)
class Horospherical:
    """The splitting a + n = ideal + section in a + n coordinates."""

    model: SolvableModel
    pd: ParabolicData
    ideal: Subspace
    section: Subspace
    projection: np.ndarray  # exact: a + n coords -> section part along the ideal

    @property
    def float_projection(self) -> np.ndarray:
        return self.model._cache(("proj", self.pd.phi.indices), lambda: exact.to_float(self.projection))


def horospherical(model: SolvableModel, pd: ParabolicData) -> Horospherical:
    ideal = model.subspace(pd.ideal)
    section = model.subspace(pd.section)
    m = model.dim
    basis = np.array(list(ideal.basis) + list(section.basis), dtype=object).reshape(m, m)
    inv = exact.inverse(basis)  # v = coeffs @ basis  ->  coeffs = v @ inv
    keep = exact.qzeros((m, m))
    for k in range(ideal.dim, m):
        keep[k, k] = Fraction(1)
    proj = exact.qmatmul(exact.qmatmul(inv, keep), basis)  # row-vector convention: v @ proj
    return Horospherical(model=model, pd=pd, ideal=ideal, section=section, projection=proj.T)


def horospherical_checks(hs: Horospherical) -> dict[str, bool]:
    """Exact facts behind the horospherical factorization and the polar action."""
    model = hs.model
    out = {}
    out["ideal_is_ideal"] = all(hs.ideal.contains(model.bracket(x, y)) for x in np.eye(model.dim, dtype=int).astype(object) for y in hs.ideal.basis)
    out["section_subalgebra"] = all(hs.section.contains(model.bracket(x, y)) for x, y in itertools.combinations(hs.section.basis, 2))
    out["intersection_trivial"] = hs.ideal.intersect(hs.section).dim == 0
    out["section_is_orthocomplement"] = hs.ideal.orthocomplement(model.metric) == hs.section
    out["projection_homomorphism"] = all(
        exact.is_zero(hs.projection @ model.bracket(x, y) - model.bracket(hs.projection @ x, hs.projection @ y))
        for x, y in itertools.combinations([np.array(r, dtype=object) for r in exact.qeye(model.dim)], 2)
    )
    orbit = orbit_second_fundamental_form(model, hs.ideal)
    out["orbit_minimal"] = exact.is_zero(orbit.mean_curvature)
    return out


# ---- group level -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupElement:
    model: SolvableModel
    matrix: np.ndarray

    @property
    def log_coords(self) -> np.ndarray:
        val = self.__dict__.get("_log")
        if val is None:
            val = group_log(self.model, self.matrix)
            object.__setattr__(self, "_log", val)
        return val

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.model, self.matrix @ other.matrix)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.model, np.linalg.inv(self.matrix))


def group_exp(model: SolvableModel, x) -> np.ndarray:
    """exp of a + n coordinates (batched over leading axes), scaling and squaring."""
    return scipy.linalg.expm(model.matrix(x))


def _log_series(z: np.ndarray, terms: int) -> np.ndarray:
    out = np.zeros_like(z)
    power = z.copy()
    for k in range(1, terms + 1):
        out += power / k if k % 2 else -power / k
        power = power @ z
    return out


def matrix_log(mats: np.ndarray) -> np.ndarray:
    """Real logarithm of a batch of matrices with positive real spectrum."""
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-1]
    batch = mats.reshape(-1, n, n)
    z = batch - np.eye(n)
    norms = np.linalg.norm(z, ord=2, axis=(1, 2)) if len(batch) else np.zeros(0)
    out = np.empty_like(batch)
    near = norms < _SERIES_RADIUS
    if near.any():
        r = float(norms[near].max())
        terms = max(2, int(math.ceil(math.log(1e-18) / math.log(max(r, 1e-18)))) + 1)
        out[near] = _log_series(z[near], min(terms, 60))
    for k in np.nonzero(~near)[0]:
        ev = np.linalg.eigvals(batch[k])
        # only the closed negative axis blocks a principal log; defective unipotent parts
        # give eigenvalues with spurious imaginary parts of size eps^(1/k), which are harmless
        if np.any((ev.real <= 0) & (np.abs(ev.imag) <= 1e-6 * np.abs(ev).max())):
            raise LogRangeError("matrix has an eigenvalue on the negative real axis; no real principal log")
        if np.abs(ev).max() / np.abs(ev).min() > 1e12:
            raise LogRangeError("matrix is too ill-conditioned for a reliable log; use smaller coordinates")
        lg = scipy.linalg.logm(batch[k])
        if np.iscomplexobj(lg):
            if np.abs(lg.imag).max() > 1e-9:
                raise LogRangeError("matrix logarithm is not real")
            lg = lg.real
        out[k] = lg
    return out.reshape(mats.shape)


def group_log(model: SolvableModel, mats, tol: float = 1e-9) -> np.ndarray:
    """a + n coordinates of log(g); raises if log(g) leaves a + n by more than tol."""
    lg = matrix_log(mats)
    x, off = model.coords_of_matrix(lg)
    scale = np.maximum(1.0, np.linalg.norm(lg.reshape(lg.shape[:-2] + (-1,)), axis=-1))
    if np.any(off > tol * scale):
        raise MembershipError("element is not in AN", float(np.max(off / scale)))
    return x


def membership_residual(model: SolvableModel, mats, s: Subspace) -> np.ndarray:
    """Metric distance of log(g) from the subalgebra s, plus any part outside a + n."""
    lg = matrix_log(mats)
    x, off = model.coords_of_matrix(lg)
    if s.dim == model.dim:
        return off
    P = exact.to_float(normal_projector(model, s))
    return model.norm(x @ P.T) + off


def horospherical_factorize(hs: Horospherical, mats) -> tuple[np.ndarray, np.ndarray]:
    """g = h s with h in the ideal subgroup and s in the section subgroup (batched)."""
    x = group_log(hs.model, mats)
    s = group_exp(hs.model, x @ hs.float_projection.T)
    h = np.asarray(mats) @ np.linalg.inv(s)
    return h, s


def factorization_residuals(hs: Horospherical, mats) -> dict[str, float]:
    mats = np.asarray(mats)
    h, s = horospherical_factorize(hs, mats)
    scale = np.maximum(1.0, np.linalg.norm(mats, axis=(-2, -1)))
    comp = np.linalg.norm(h @ s - mats, axis=(-2, -1)) / scale
    return {
        "compose": float(np.max(comp, initial=0.0)),
        "h_membership": float(np.max(membership_residual(hs.model, h, hs.ideal), initial=0.0)),
        "s_membership": float(np.max(membership_residual(hs.model, s, hs.section), initial=0.0)),
    }


# ---- geodesics ---------------------------------------------------------


def _exp_small(theta_mats: np.ndarray) -> np.ndarray:
    """exp of small matrices by Taylor series; falls back to expm when not small."""
    n = theta_mats.shape[-1]
    norm = float(np.abs(theta_mats).sum(axis=-1).max(initial=0.0))
    if norm > 0.1:
        return scipy.linalg.expm(theta_mats)
    out = np.broadcast_to(np.eye(n), theta_mats.shape).copy()
    term = out.copy()
    for k in range(1, 12):
        term = term @ theta_mats / k
        out += term
    return out


@dataclass(frozen=True)
class GeodesicResult:
    points: np.ndarray  # (..., n, n)
    velocity: np.ndarray  # left-trivialized (..., m)
    energy_drift: np.ndarray
    steps: int


def geodesic(model: SolvableModel, p, v, t: float = 1.0, step: float = 1e-3) -> GeodesicResult:
    """p Exp_e(t v) by a Runge-Kutta-Munthe-Kaas integrator of order 4.

    The left-trivialized velocity obeys v' = -nabla_v v; the group part is
    advanced with the inverse dexp series truncated after the double bracket.  The step count
    is ceil(|t| / step), so results depend smoothly on p, v and t.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if step < 1e-7:
        raise ValueError("geodesic step below 1e-7 (step-size underflow guard)")
    nsteps = max(1, int(math.ceil(abs(t) / step - 1e-12)))
    h = t / nsteps
    c = model.float_structure
    gam = model.float_conn

    def rhs(x):
        return -np.einsum("...i,...j,ijk->...k", x, x, gam)

    def br(x, y):
        return np.einsum("...i,...j,ijk->...k", x, y, c)

    # g = g0 exp(theta) with g^-1 g' = a gives theta' = a + [theta, a]/2 + [theta, [theta, a]]/12 + ...
    def dexpinv(th, a):
        ta = br(th, a)
        return a + ta / 2 + br(th, ta) / 12

    e0 = model.inner(v, v)
    g = np.broadcast_to(np.eye(model.rep_dim), v.shape[:-1] + (model.rep_dim, model.rep_dim)).copy()
    cur = v.copy()
    for _ in range(nsteps):
        k1 = rhs(cur)
        v2 = cur + h / 2 * k1
        k2 = rhs(v2)
        v3 = cur + h / 2 * k2
        k3 = rhs(v3)
        v4 = cur + h * k3
        k4 = rhs(v4)
        f1 = h * cur
        f2 = dexpinv(f1 / 2, h * v2)
        f3 = dexpinv(f2 / 2, h * v3)
        f4 = dexpinv(f3, h * v4)
        theta = (f1 + 2 * f2 + 2 * f3 + f4) / 6
        g = g @ _exp_small(model.matrix(theta))
        cur = cur + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = np.abs(model.inner(cur, cur) - e0)
    points = np.asarray(p) @ g if p is not None else g
    return GeodesicResult(points=points, velocity=cur, energy_drift=drift, steps=nsteps)


def iwasawa_an(model: SolvableModel, mats) -> np.ndarray:
    """AN factor S of g = S k (k orthogonal), via a Cholesky factorization of g g^T."""
    t = model.triangular_frame
    mats = np.asarray(mats)
    n = model.rep_dim
    pos = np.swapaxes(t, 0, 1) @ (mats @ np.swapaxes(mats, -1, -2)) @ t
    rev = np.arange(n)[::-1]
    low = np.linalg.cholesky(pos[..., rev[:, None], rev[None, :]])
    upper = low[..., rev[:, None], rev[None, :]]
    return t @ upper @ t.T


def symmetric_geodesic(model: SolvableModel, v, t: float | np.ndarray = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Exp_e(t v) through the symmetric-space picture: exp(t P) o with P = (v - theta v)/2.

    Returns the AN points and their left-trivialized velocities.  This route
    avoids time stepping; it is used to sample families and to cross-check
    :func:`geodesic`.
    """
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    P = np.tensordot(v, model.p_map, axes=(-1, 0))
    tP = t[..., None, None] * P
    S = iwasawa_an(model, scipy.linalg.expm(tP))
    # S^-1 S' is the a + n part of Ad(S^-1) P along k
    adj = np.linalg.solve(S, P @ S)
    gco = adj.reshape(adj.shape[:-2] + (-1,)) @ model.g_pinv
    vel = gco @ model.iwasawa_projection.T
    return S, vel


def symmetric_distance(model: SolvableModel, p, q=None) -> np.ndarray:
    """Riemannian distance d(p, q) computed from P = log(S S^T)/2 with S = p^-1 q."""
    s = np.asarray(p) if q is None else np.linalg.solve(np.asarray(p), np.asarray(q))
    pos = s @ np.swapaxes(s, -1, -2)
    w, u = np.linalg.eigh(pos)
    P = (u * (np.log(w) / 2)[..., None, :]) @ np.swapaxes(u, -1, -2)
    gco = P.reshape(P.shape[:-2] + (-1,)) @ model.g_pinv
    kil = exact.to_float(model.g.killing)
    return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", gco, kil, gco), 0.0))


def sectional_curvature_range(model: SolvableModel, s: Subspace | None = None) -> tuple[Fraction, Fraction]:
    """Exact min and max of sectional curvature over basis planes of an orthogonalized s."""
    s = s if s is not None else Subspace.full(model.dim)
    basis = _gram_schmidt_exact(model, s)
    vals = [model.sectional_curvature(x, y) for x, y in itertools.combinations(basis, 2)]
    if not vals:
        return Fraction(0), Fraction(0)
    return min(vals), max(vals)


def _gram_schmidt_exact(model: SolvableModel, s: Subspace) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in s.basis:
        w = np.array(v, dtype=object)
        for u in out:
            w = w - (model.inner(w, u) / model.inner(u, u)) * u
        out.append(w)
    return out


def is_flat(model: SolvableModel, s: Subspace) -> bool:
    """Exact test that R vanishes on the totally geodesic subalgebra s."""
    basis = list(s.basis)
    return all(exact.is_zero(model.curvature(x, y, z)) for x, y in itertools.combinations(basis, 2) for z in basis)


def model_report(model: SolvableModel) -> dict:
    checks = model_checks(model)
    lo, hi = sectional_curvature_range(model)
    return {
        "algebra": model.g.name,
        "dim": model.dim,
        "rep_dim": model.rep_dim,
        "checks": checks,
        "sectional_curvature_basis_planes": [exact.fmt(lo), exact.fmt(hi)],
        "scalar_curvature": model.scalar_curvature(),
    }


def random_an(model: SolvableModel, rng: np.random.Generator, count: int, scale: float = 1.0) -> np.ndarray:
    """Random a + n coordinates with entries uniform in [-scale, scale]."""
    return rng.uniform(-scale, scale, size=(count, model.dim))


def subspace_from_rows(rows: Sequence, ambient: int) -> Subspace:
    return Subspace.span([exact.qarray(r) for r in rows], ambient)
