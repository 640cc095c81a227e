"""Parabolic subalgebras q_phi = l_phi + n_phi and the boundary component algebra.

Simple roots are addressed by 1-based index into ``rd.simple_roots``, the same
numbering the CLI ``--phi`` flag uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import exact
from .exact import Subspace
from .liealg import MatrixLieAlgebra, bracket, subalgebra
from .rootspace import (
    Root,
    RootSpaceDecomposition,
    bracket_space,
    centralizer_in,
    is_nilpotent,
    is_subalgebra,
    root_decompose,
)


@dataclass(frozen=True)
class PhiSubset:
    indices: tuple[int, ...]

    @classmethod
    def parse(cls, text: str | Iterable[int] | None) -> "PhiSubset":
        if text is None:
            return cls(())
        if isinstance(text, str):
            text = text.strip()
            items = [int(t) for t in text.split(",") if t.strip()] if text not in ("", "-", "none") else []
        else:
            items = [int(t) for t in text]
        return cls(tuple(sorted(set(items))))

    def validate(self, rank: int) -> None:
        bad = [i for i in self.indices if not 1 <= i <= rank]
        if bad:
            raise ValueError(f"phi indices {bad} outside 1..{rank}")

    def label(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"


@dataclass(frozen=True, eq=False)
class ParabolicData:
    rd: RootSpaceDecomposition
    phi: PhiSubset
    sigma_phi: tuple[Root, ...]
    sigma_phi_plus: tuple[Root, ...]
    l: Subspace
    gphi: Subspace
    nphi: Subspace
    aphi: Subspace
    q: Subspace
    a_sup: Subspace
    n_sup: Subspace

    @property
    def phi_roots(self) -> list[Root]:
        return [self.rd.simple_roots[i - 1] for i in self.phi.indices]

    @property
    def ideal(self) -> Subspace:
        """a_phi + n_phi, the Lie algebra of the acting group A_phi N_phi."""
        return self.aphi + self.nphi

    @property
    def section(self) -> Subspace:
        """a^phi + n^phi, the Lie algebra of the section subgroup."""
        return self.a_sup + self.n_sup

    def dims(self) -> dict:
        return {
            "sigma_phi": len(self.sigma_phi),
            "l": self.l.dim,
            "g_phi": self.gphi.dim,
            "n_phi": self.nphi.dim,
            "a_phi": self.aphi.dim,
            "q": self.q.dim,
            "a_sup": self.a_sup.dim,
            "n_sup": self.n_sup.dim,
        }


def _span_of_spaces(rd: RootSpaceDecomposition, roots: Iterable[Root], extra: Subspace | None = None) -> Subspace:
    vecs = [v for a in roots for v in rd.root_spaces[a].basis]
    if extra is not None:
        vecs += list(extra.basis)
    return Subspace.span(vecs, rd.g.dim)


def in_integer_span(rd: RootSpaceDecomposition, alpha: Root, phi: PhiSubset) -> bool:
    coeffs = rd.simple_coefficients(alpha)
    return all(c.denominator == 1 for c in coeffs) and all(
        c == 0 for i, c in enumerate(coeffs, start=1) if i not in phi.indices
    )


def build_parabolic(rd: RootSpaceDecomposition, phi: PhiSubset | Iterable[int] | str) -> ParabolicData:
    if not isinstance(phi, PhiSubset):
        phi = PhiSubset.parse(phi)
    phi.validate(rd.rank)
    g = rd.g
    d = g.dim
    sigma_phi = tuple(a for a in rd.root_set if in_integer_span(rd, a, phi))
    pos = set(rd.positive_roots)
    sigma_phi_plus = tuple(a for a in sigma_phi if a in pos)
    l = _span_of_spaces(rd, sigma_phi, rd.g0)
    nphi = _span_of_spaces(rd, [a for a in rd.positive_roots if a not in sigma_phi_plus])
    n_sup = _span_of_spaces(rd, sigma_phi_plus)

    # a_phi: common kernel of the roots in phi, inside a
    phi_rows = np.array([rd.simple_roots[i - 1] for i in phi.indices], dtype=object).reshape(len(phi.indices), rd.rank)
    if phi.indices:
        ker = exact.nullspace(phi_rows)
    else:
        ker = exact.qeye(rd.rank)
    aphi = Subspace.span([sum((c * h for c, h in zip(k, rd.a_basis)), exact.qzeros(d)) for k in ker], d)
    a_sup = aphi.orthocomplement(g.killing, within=rd.a)
    gphi = bracket_space(g, l, l)
    q = l + nphi
    return ParabolicData(
        rd=rd,
        phi=phi,
        sigma_phi=sigma_phi,
        sigma_phi_plus=sigma_phi_plus,
        l=l,
        gphi=gphi,
        nphi=nphi,
        aphi=aphi,
        q=q,
        a_sup=a_sup,
        n_sup=n_sup,
    )


def intrinsic_killing(g: MatrixLieAlgebra, s: Subspace) -> np.ndarray:
    """Killing form of the subalgebra s computed from its own brackets."""
    m = s.dim
    if m == 0:
        return exact.qzeros((0, 0))
    ads = exact.qzeros((m, m, m))
    for i, u in enumerate(s.basis):
        for j, v in enumerate(s.basis):
            ads[i][:, j] = s.coordinates(bracket(g, u, v))
    kil = exact.qzeros((m, m))
    for i in range(m):
        for j in range(i, m):
            kil[i, j] = kil[j, i] = np.trace(exact.qmatmul(ads[i], ads[j]))
    return kil


def normalizer_in(g: MatrixLieAlgebra, s: Subspace) -> Subspace:
    """{X : [X, s] inside s}, as an exact kernel."""
    d = g.dim
    if s.dim == 0:
        return Subspace.full(d)
    # X -> [h, X] followed by the quotient map g -> g / s; quotient coordinates
    # are the non-pivot entries after reduction against s
    free = [c for c in range(d) if c not in s.pivots]
    rows = []
    for h in s.basis:
        cols = []
        for j in range(d):
            e = exact.qzeros(d)
            e[j] = Fraction(1)
            r = s.reduce(bracket(g, h, e))
            cols.append([r[c] for c in free])
        rows.append(np.array(cols, dtype=object).T)
    cond = np.concatenate(rows, axis=0)
    return Subspace.span(list(exact.nullspace(cond)), d)


def check_parabolic(pd: ParabolicData) -> dict[str, bool]:
    """Exact verification of every structural claim about q_phi."""
    rd, g = pd.rd, pd.rd.g
    out = {}
    out["dim_a_phi"] = pd.aphi.dim == rd.rank - len(pd.phi.indices)
    out["a_split"] = exact.direct_sum_ok([pd.aphi, pd.a_sup]) and (pd.aphi + pd.a_sup) == rd.a
    out["a_sup_equals_a_cap_g_phi"] = pd.a_sup == rd.a.intersect(pd.gphi)
    out["l_normalizes_n_phi"] = pd.nphi.contains_space(bracket_space(g, pd.l, pd.nphi))
    out["a_phi_centralizes_l"] = exact.is_zero(
        np.array([bracket(g, h, x) for h in pd.aphi.basis for x in pd.l.basis] or [exact.qzeros(g.dim)], dtype=object)
    )
    out["centralizer_of_a_phi_is_l"] = _centralizer_full(g, pd.aphi) == pd.l
    out["normalizer_of_a_phi_is_l"] = normalizer_in(g, pd.aphi) == pd.l
    out["l_subalgebra"] = is_subalgebra(g, pd.l)
    out["n_phi_nilpotent_subalgebra"] = is_subalgebra(g, pd.nphi) and is_nilpotent(g, pd.nphi)
    out["a_phi_abelian"] = bracket_space(g, pd.aphi, pd.aphi).dim == 0
    out["g_phi_semisimple"] = pd.gphi.dim == 0 or exact.det(intrinsic_killing(g, pd.gphi)) != 0
    out["q_subalgebra"] = is_subalgebra(g, pd.q)
    out["l_cap_n_phi_zero"] = pd.l.intersect(pd.nphi).dim == 0 and pd.q.dim == pd.l.dim + pd.nphi.dim
    an = rd.a + rd.n
    ideal, section = pd.ideal, pd.section
    out["horospherical_split"] = exact.direct_sum_ok([ideal, section]) and (ideal + section) == an
    out["ideal_in_a_plus_n"] = ideal.contains_space(bracket_space(g, an, ideal))
    out["section_subalgebra"] = is_subalgebra(g, section)
    out["minimal_parabolic_contained"] = pd.q.contains_space(rd.k0 + rd.a + rd.n)
    return out


def _centralizer_full(g: MatrixLieAlgebra, s: Subspace) -> Subspace:
    if s.dim == 0:
        return Subspace.full(g.dim)
    return centralizer_in(g, list(s.basis), Subspace.full(g.dim))


def orthogonality_test(rd: RootSpaceDecomposition, phi: PhiSubset | Iterable[int] | str) -> bool:
    """True iff every root of phi is B-orthogonal to every simple root outside phi."""
    if not isinstance(phi, PhiSubset):
        phi = PhiSubset.parse(phi)
    phi.validate(rd.rank)
    inside = [rd.simple_roots[i - 1] for i in phi.indices]
    outside = [a for i, a in enumerate(rd.simple_roots, start=1) if i not in phi.indices]
    return all(rd.inner(a, b) == 0 for a in inside for b in outside)


@dataclass(frozen=True, eq=False)
class BoundaryComponent:
    algebra: MatrixLieAlgebra
    roots: RootSpaceDecomposition
    parabolic: ParabolicData

    @property
    def rank(self) -> int:
        return self.roots.rank


def boundary_component_algebra(pd: ParabolicData) -> BoundaryComponent:
    """g_phi as a matrix algebra in its own right, with its root decomposition over a^phi."""
    if not pd.phi.indices:
        raise ValueError("boundary component is a point (phi is empty)")
    rd, g = pd.rd, pd.rd.g
    gphi = pd.gphi
    a_coords = [gphi.coordinates(v) for v in pd.a_sup.basis]
    # B-orthogonal projection of H_reg onto a^phi: regular for Sigma_phi because
    # those roots vanish on a_phi
    h = sum((c * v for c, v in zip(rd.h_reg, rd.a_basis)), exact.qzeros(g.dim))
    A = pd.a_sup.basis
    gram = exact.qmatmul(exact.qmatmul(A, g.killing), A.T)
    rhs = exact.qmatmul(exact.qmatmul(A, g.killing), h.reshape(-1, 1))[:, 0]
    h_coords = exact.solve(gram, rhs)
    name = f"{g.name}[phi={pd.phi.label()}]"
    alg = subalgebra(g, list(gphi.basis), name, a_hint_coords=a_coords, h_reg_hint=list(h_coords))
    sub_rd = root_decompose(alg)
    if sub_rd.rank != len(pd.phi.indices):
        raise RuntimeError(f"boundary component rank {sub_rd.rank} != |phi| = {len(pd.phi.indices)}")
    return BoundaryComponent(algebra=alg, roots=sub_rd, parabolic=pd)


def all_subsets(rank: int) -> list[PhiSubset]:
    return [PhiSubset(tuple(c)) for k in range(rank + 1) for c in itertools.combinations(range(1, rank + 1), k)]


def parabolic_report(pd: ParabolicData) -> dict:
    checks = check_parabolic(pd)
    return {
        "algebra": pd.rd.g.name,
        "phi": list(pd.phi.indices),
        "dims": pd.dims(),
        "sigma_phi": [[exact.fmt(x) for x in a] for a in pd.sigma_phi],
        "checks": {k: bool(v) for k, v in checks.items()},
        "orthogonal": orthogonality_test(pd.rd, pd.phi),
    }
