"""Restricted root space decomposition over a maximal abelian a in p.

Eigenvalues of ad(H) are found without any floating eigensolver: ad(H) is
scaled to an integer matrix, its characteristic polynomial is computed with
the Faddeev-LeVerrier recursion in integers, and the (necessarily integral)
roots are enumerated among divisors of the trailing coefficient within the
Gershgorin bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .exact import Subspace, q
from .liealg import CartanDecomposition, ConstructionError, MatrixLieAlgebra, bracket, cartan_decompose

Root = tuple  # tuple of Fractions: alpha(H_1), ..., alpha(H_r)


class RegularityError(ValueError):
    pass


@dataclass(frozen=True)
class RestrictedRoot:
    coords: Root
    multiplicity: int
    summand: int = 0


@dataclass(frozen=True, eq=False)
class RootSpaceDecomposition:
    g: MatrixLieAlgebra
    a_basis: tuple[np.ndarray, ...]
    roots: tuple[RestrictedRoot, ...]
    root_spaces: dict
    g0: Subspace
    k0: Subspace
    a: Subspace
    h_reg: tuple[Fraction, ...]
    positive_roots: tuple[Root, ...]
    simple_roots: tuple[Root, ...]
    n: Subspace
    cartan: CartanDecomposition = field(repr=False, default=None)

    @property
    def rank(self) -> int:
        return len(self.a_basis)

    @property
    def root_set(self) -> tuple[Root, ...]:
        return tuple(r.coords for r in self.roots)

    def multiplicity(self, alpha: Root) -> int:
        return self.root_spaces[tuple(alpha)].dim

    def space(self, alpha: Root) -> Subspace:
        alpha = tuple(q(x) for x in alpha)
        if all(x == 0 for x in alpha):
            return self.g0
        return self.root_spaces.get(alpha, Subspace.zero(self.g.dim))

    @property
    def a_gram(self) -> np.ndarray:
        """B restricted to the a-basis."""
        A = exact.stack(self.a_basis, self.g.dim)
        return exact.qmatmul(exact.qmatmul(A, self.g.killing), A.T)

    def inner(self, alpha: Root, beta: Root) -> Fraction:
        """B-dual inner product on a*: <alpha, beta> = alpha G^-1 beta."""
        ginv = _cached_inverse(self)
        a = np.array(alpha, dtype=object)
        b = np.array(beta, dtype=object)
        return a @ ginv @ b

    def dual_vector(self, alpha: Root) -> np.ndarray:
        """H_alpha in a with B(H_alpha, H) = alpha(H); coordinates in the g basis."""
        ginv = _cached_inverse(self)
        c = ginv @ np.array(alpha, dtype=object)
        return sum((ci * h for ci, h in zip(c, self.a_basis)), exact.qzeros(self.g.dim))

    def simple_coefficients(self, alpha: Root) -> tuple[Fraction, ...]:
        """Coefficients of alpha in the simple roots (exact solve)."""
        S = np.array(self.simple_roots, dtype=object).T
        x = exact.solve(S, np.array(alpha, dtype=object))
        if x is None:
            raise ValueError(f"{alpha} is not in the span of the simple roots")
        return tuple(x)

    def dims(self) -> dict:
        return {
            "g": self.g.dim,
            "g0": self.g0.dim,
            "k0": self.k0.dim,
            "a": self.a.dim,
            "n": self.n.dim,
        }


def _cached_inverse(rd: RootSpaceDecomposition) -> np.ndarray:
    inv = rd.__dict__.get("_a_gram_inv")
    if inv is None:
        inv = exact.inverse(rd.a_gram)
        object.__setattr__(rd, "_a_gram_inv", inv)
    return inv


def _ad_vector(g: MatrixLieAlgebra, h: np.ndarray) -> np.ndarray:
    """ad(H) for a coordinate vector H (columns are images of basis vectors)."""
    return np.tensordot(np.asarray(h, dtype=object), np.transpose(g.structure_constants, (0, 2, 1)), axes=(0, 0))


def charpoly(mat_int: np.ndarray) -> list[int]:
    """Characteristic polynomial coefficients [1, c_{n-1}, ..., c_0] of an integer matrix."""
    a = np.asarray(mat_int).astype(object)
    n = a.shape[0]
    coeffs = [1]
    m = np.zeros((n, n), dtype=object)
    eye = np.eye(n, dtype=np.int64).astype(object)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        t = int(np.trace(a @ m))
        if t % k:
            raise ConstructionError("non-integral Faddeev-LeVerrier step")
        coeffs.append(-t // k)
    return coeffs


def _horner(coeffs: list[int], x: int) -> int:
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _deflate(coeffs: list[int], x: int) -> list[int]:
    out = []
    acc = 0
    for c in coeffs[:-1]:
        acc = acc * x + c
        out.append(acc)
    return out


def integer_eigenvalues(mat_int: np.ndarray) -> dict[int, int]:
    """Integer roots of the characteristic polynomial with algebraic multiplicities."""
    coeffs = charpoly(mat_int)
    roots: dict[int, int] = {}
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
        roots[0] = roots.get(0, 0) + 1
    if len(coeffs) == 1:
        return roots
    a = np.abs(np.asarray(mat_int).astype(object))
    bound = int(max(sum(row) for row in a)) if a.size else 0
    c0 = abs(coeffs[-1])
    for cand in range(1, bound + 1):
        if c0 % cand:
            continue
        for x in (cand, -cand):
            while len(coeffs) > 1 and _horner(coeffs, x) == 0:
                coeffs = _deflate(coeffs, x)
                roots[x] = roots.get(x, 0) + 1
    return roots


def eigenspaces(ad_h: np.ndarray) -> dict[Fraction, Subspace]:
    """Exact eigenspaces of a rational diagonalizable matrix with rational spectrum."""
    d = ad_h.shape[0]
    mint, den = exact.integer_scaled(ad_h)
    spec = integer_eigenvalues(mint)
    spaces = {}
    total = 0
    for lam in sorted(spec):
        shifted = ad_h - Fraction(lam, den) * exact.qeye(d)
        ker = exact.nullspace(shifted)
        spaces[Fraction(lam, den)] = Subspace.span(list(ker), d)
        total += len(ker)
    if total != d:
        raise ConstructionError(
            f"ad(H) has non-rational eigenvalues or is not diagonalizable "
            f"(rational eigenvectors span {total} of {d} dimensions)"
        )
    return spaces


def maximal_abelian(g: MatrixLieAlgebra, cd: CartanDecomposition | None = None, a_basis=None) -> tuple[np.ndarray, ...]:
    """Return the catalog maximal abelian a in p after checking it exactly."""
    cd = cd or cartan_decompose(g)
    basis = tuple(np.asarray(v, dtype=object) for v in (a_basis if a_basis is not None else g.a_hint))
    if not basis:
        raise ConstructionError(f"{g.name}: no maximal abelian subspace in the catalog entry")
    for v in basis:
        if not cd.p.contains(v):
            raise ConstructionError(f"{g.name}: catalog a is not inside p")
    for u, v in itertools.combinations(basis, 2):
        if not exact.is_zero(bracket(g, u, v)):
            raise ConstructionError(f"{g.name}: catalog a is not abelian")
    if centralizer_in(g, basis, cd.p) != Subspace.span(basis, g.dim):
        raise ConstructionError(f"{g.name}: catalog a is abelian but not maximal in p")
    return basis


def centralizer_in(g: MatrixLieAlgebra, elements: Sequence[np.ndarray], within: Subspace) -> Subspace:
    """{X in within : [H, X] = 0 for all H in elements}, by an exact kernel."""
    w = within.basis
    if within.dim == 0:
        return within
    rows = []
    for h in elements:
        ad_h = _ad_vector(g, h)
        rows.append(exact.qmatmul(ad_h, w.T))
    cond = np.concatenate(rows, axis=0)
    ker = exact.nullspace(cond)
    return Subspace.span([exact.qmatmul(k.reshape(1, -1), w)[0] for k in ker], g.dim)


def root_decompose(
    g: MatrixLieAlgebra,
    a_basis: Sequence[np.ndarray] | None = None,
    h_reg: Sequence | None = None,
) -> RootSpaceDecomposition:
    """Simultaneous exact eigenspace decomposition of ad(a) on g."""
    cd = cartan_decompose(g)
    a_basis = maximal_abelian(g, cd, a_basis)
    d = g.dim
    per_h = [eigenspaces(_ad_vector(g, h)) for h in a_basis]

    joint: dict[Root, Subspace] = {}
    for combo in itertools.product(*[list(s.items()) for s in per_h]):
        coords = tuple(lam for lam, _ in combo)
        space = combo[0][1]
        for _, s in combo[1:]:
            if space.dim == 0:
                break
            space = space.intersect(s)
        if space.dim:
            joint[coords] = space
    zero = tuple(Fraction(0) for _ in a_basis)
    g0 = joint.pop(zero, Subspace.zero(d))
    if sum(s.dim for s in joint.values()) + g0.dim != d:
        raise ConstructionError(f"{g.name}: joint eigenspaces do not exhaust g")

    roots = []
    for coords, space in sorted(joint.items(), key=lambda kv: tuple(-x for x in kv[0])):
        tags = {g.summand_of[i] for v in space.basis for i, x in enumerate(v) if x != 0}
        roots.append(RestrictedRoot(coords, space.dim, min(tags) if len(tags) == 1 else -1))
    k0 = g0.intersect(cd.k)
    rd = RootSpaceDecomposition(
        g=g,
        a_basis=a_basis,
        roots=tuple(roots),
        root_spaces=joint,
        g0=g0,
        k0=k0,
        a=Subspace.span(a_basis, d),
        h_reg=(),
        positive_roots=(),
        simple_roots=(),
        n=Subspace.zero(d),
        cartan=cd,
    )
    if h_reg is None:
        h_reg = g.h_reg_hint
    return choose_positive_system(rd, h_reg)


def _eval(alpha: Root, h: Sequence[Fraction]) -> Fraction:
    return sum((a * x for a, x in zip(alpha, h)), Fraction(0))


def choose_positive_system(rd: RootSpaceDecomposition, h_reg: Sequence) -> RootSpaceDecomposition:
    """Positive roots are those positive on ``h_reg`` (coordinates in the a-basis)."""
    h = tuple(q(x) for x in h_reg)
    if len(h) != rd.rank:
        raise ValueError(f"H_reg needs {rd.rank} coordinates, got {len(h)}")
    for r in rd.roots:
        if _eval(r.coords, h) == 0:
            raise RegularityError(f"H_reg is not regular: root {exact.fmt_array(np.array(r.coords, dtype=object))} vanishes on it")
    positive = [r.coords for r in rd.roots if _eval(r.coords, h) > 0]
    pos_set = set(positive)
    sums = {tuple(x + y for x, y in zip(a, b)) for a in positive for b in positive}
    simple = [a for a in positive if a not in sums]
    if len(simple) != rd.rank:
        raise ConstructionError(f"found {len(simple)} simple roots for rank {rd.rank}")
    rd2 = replace(rd, h_reg=h, positive_roots=tuple(positive), simple_roots=tuple(simple))
    simple = _order_simple_roots(rd2, simple)
    n = Subspace.span([v for a in positive for v in rd.root_spaces[a].basis], rd.g.dim)
    out = replace(rd2, simple_roots=tuple(simple), n=n)
    for a in positive:
        coeffs = out.simple_coefficients(a)
        if any(c < 0 or c.denominator != 1 for c in coeffs):
            raise ConstructionError(f"positive root {a} is not a nonnegative integer combination of simple roots")
    assert pos_set == set(out.positive_roots)
    return out


def cartan_matrix(rd: RootSpaceDecomposition, simple: Sequence[Root] | None = None) -> np.ndarray:
    simple = list(simple if simple is not None else rd.simple_roots)
    r = len(simple)
    out = exact.qzeros((r, r))
    for i in range(r):
        for j in range(r):
            out[i, j] = 2 * rd.inner(simple[i], simple[j]) / rd.inner(simple[j], simple[j])
    return out


def _is_doubled(rd: RootSpaceDecomposition, alpha: Root) -> bool:
    return tuple(2 * x for x in alpha) in rd.root_spaces


def _order_simple_roots(rd: RootSpaceDecomposition, simple: list[Root]) -> list[Root]:
    """Bourbaki-style order: components follow summands; chains end at the short/doubled root."""
    r = len(simple)
    C = cartan_matrix(rd, simple)
    adj = {i: [j for j in range(r) if j != i and C[i, j] != 0] for i in range(r)}
    seen: set[int] = set()
    comps = []
    for i in sorted(range(r), key=lambda k: tuple(-x for x in simple[k])):
        if i in seen:
            continue
        stack, comp = [i], []
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            comp.append(v)
            stack.extend(adj[v])
        comps.append(comp)

    def length(i):
        return rd.inner(simple[i], simple[i])

    ordered = []
    for comp in comps:
        ends = [v for v in comp if len(adj[v]) <= 1]
        is_path = all(len(adj[v]) <= 2 for v in comp) and len(ends) == (1 if len(comp) == 1 else 2)
        if not is_path:
            ordered.extend(sorted(comp, key=lambda k: tuple(-x for x in simple[k])))
            continue
        if len(comp) == 1:
            ordered.extend(comp)
            continue

        # the special end (shortest, or carrying 2*alpha) goes last
        def end_key(v):
            return (_is_doubled(rd, simple[v]), -length(v), tuple(simple[v]))

        last = max(ends, key=end_key)
        first = next(v for v in ends if v != last)
        if end_key(first)[:2] == end_key(last)[:2]:
            first, last = sorted(ends, key=lambda k: tuple(-x for x in simple[k]))
        path, prev, cur = [first], None, first
        while cur != last:
            nxt = next(v for v in adj[cur] if v != prev)
            prev, cur = cur, nxt
            path.append(cur)
        ordered.extend(path)
    return [simple[i] for i in ordered]


def classify_root_system(rd: RootSpaceDecomposition) -> dict:
    """Type label from the Cartan matrix of the simple roots plus the 2*alpha signature.

    Returns ``{"label": ..., "components": [...], "cartan_matrix": ...}``; an
    unrecognised pattern yields ``"unclassified"`` rather than a guess.
    """
    C = cartan_matrix(rd)
    r = len(rd.simple_roots)
    adj = {i: [j for j in range(r) if j != i and C[i, j] != 0] for i in range(r)}
    seen: set[int] = set()
    labels = []
    for i in range(r):
        if i in seen:
            continue
        stack, comp = [i], []
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            comp.append(v)
            stack.extend(adj[v])
        comp.sort()
        labels.append(_classify_component(rd, C, comp))
    label = "x".join(labels)
    if any(lab == "unclassified" for lab in labels):
        label = "unclassified"
    return {"label": label, "components": labels, "cartan_matrix": exact.fmt_array(C)}


def _classify_component(rd: RootSpaceDecomposition, C: np.ndarray, comp: list[int]) -> str:
    n = len(comp)
    simple = [rd.simple_roots[i] for i in comp]
    span = Subspace.span([np.array(s, dtype=object) for s in simple], rd.rank)
    comp_roots = [r for r in rd.root_set if span.contains(np.array(r, dtype=object))]
    doubled = any(_is_doubled(rd, r) for r in comp_roots)
    sub = np.array([[C[i, j] for j in comp] for i in comp], dtype=object)
    if n == 1:
        return "BC1" if doubled else "A1"
    degrees = [sum(1 for j in range(n) if j != i and sub[i, j] != 0) for i in range(n)]
    is_chain = max(degrees) <= 2 and degrees.count(1) == 2
    entries = [int(sub[i, j]) for i in range(n) for j in range(n) if i != j and sub[i, j] != 0]
    if is_chain and all(x == -1 for x in entries):
        return "unclassified" if doubled else f"A{n}"
    if is_chain and sorted(entries).count(-2) == 1 and entries.count(-1) == len(entries) - 1:
        # C[i, j] = -2 marks j as the short root of the double bond
        i, j = next((i, j) for i in range(n) for j in range(n) if i != j and sub[i, j] == -2)
        if degrees[j] == 1:
            return f"BC{n}" if doubled else f"B{n}"
        if degrees[i] == 1 and not doubled:
            return f"C{n}"
        return "unclassified"
    if is_chain and n == 2 and sorted(entries) == [-3, -1] and not doubled:
        return "G2"
    if not doubled and not is_chain and all(x == -1 for x in entries) and n >= 4 \
            and degrees.count(3) == 1 and degrees.count(1) == 3:
        return f"D{n}"
    return "unclassified"


def _chain(sub: np.ndarray) -> list[int]:
    n = sub.shape[0]
    adj = {i: [j for j in range(n) if j != i and sub[i, j] != 0] for i in range(n)}
    start = next(i for i in range(n) if len(adj[i]) == 1)
    path, prev = [start], None
    while len(path) < n:
        nxt = next(v for v in adj[path[-1]] if v != prev)
        prev = path[-1]
        path.append(nxt)
    return path


def check_decomposition(rd: RootSpaceDecomposition) -> dict[str, bool]:
    """Exact verification of every RootSpaceDecomposition invariant."""
    g = rd.g
    d = g.dim
    out = {}
    out["dimension_bookkeeping"] = rd.g0.dim + sum(r.multiplicity for r in rd.roots) == d
    out["g0_is_k0_plus_a"] = (rd.k0 + rd.a) == rd.g0 and rd.k0.dim + rd.a.dim == rd.g0.dim
    out["negatives_with_same_multiplicity"] = all(
        tuple(-x for x in r.coords) in rd.root_spaces
        and rd.root_spaces[tuple(-x for x in r.coords)].dim == r.multiplicity
        for r in rd.roots
    )
    out["theta_swaps_root_spaces"] = all(
        rd.space(tuple(-x for x in alpha)).contains(g.theta @ v)
        for alpha, sp in rd.root_spaces.items()
        for v in sp.basis
    )
    out["grading"] = grading_ok(rd)
    out["positive_roots_nonnegative_integral"] = all(
        all(c >= 0 and c.denominator == 1 for c in rd.simple_coefficients(a)) for a in rd.positive_roots
    )
    out["n_nilpotent"] = is_nilpotent(g, rd.n)
    an = rd.a + rd.n
    out["a_plus_n_subalgebra"] = is_subalgebra(g, an)
    out["iwasawa_direct_sum"] = exact.direct_sum_ok([rd.cartan.k, rd.a, rd.n]) and rd.cartan.k.dim + rd.a.dim + rd.n.dim == d
    out["killing_orthogonality"] = killing_orthogonality_ok(rd)
    return out


def grading_ok(rd: RootSpaceDecomposition) -> bool:
    """[g_alpha, g_beta] inside g_{alpha+beta} for all alpha, beta in Sigma + {0}."""
    g = rd.g
    spaces = [(tuple(Fraction(0) for _ in range(rd.rank)), rd.g0)] + list(rd.root_spaces.items())
    for (a, sa), (b, sb) in itertools.combinations_with_replacement(spaces, 2):
        target = rd.space(tuple(x + y for x, y in zip(a, b)))
        for u in sa.basis:
            for v in sb.basis:
                if not target.contains(bracket(g, u, v)):
                    return False
    return True


def killing_orthogonality_ok(rd: RootSpaceDecomposition) -> bool:
    g = rd.g
    spaces = [(tuple(Fraction(0) for _ in range(rd.rank)), rd.g0)] + list(rd.root_spaces.items())
    for (a, sa), (b, sb) in itertools.combinations_with_replacement(spaces, 2):
        if all(x + y == 0 for x, y in zip(a, b)):
            continue
        m = exact.qmatmul(exact.qmatmul(sa.basis, g.killing), sb.basis.T)
        if not exact.is_zero(m):
            return False
    return True


def bracket_space(g: MatrixLieAlgebra, u: Subspace, v: Subspace) -> Subspace:
    return Subspace.span([bracket(g, x, y) for x in u.basis for y in v.basis], g.dim)


def is_subalgebra(g: MatrixLieAlgebra, s: Subspace) -> bool:
    return all(s.contains(bracket(g, x, y)) for x, y in itertools.combinations(s.basis, 2))


def is_nilpotent(g: MatrixLieAlgebra, s: Subspace) -> bool:
    """Lower central series of s reaches zero."""
    cur = s
    for _ in range(s.dim + 1):
        if cur.dim == 0:
            return True
        nxt = bracket_space(g, s, cur)
        if nxt.dim >= cur.dim:
            return False
        cur = nxt
    return cur.dim == 0


def nilpotency_degree(g: MatrixLieAlgebra, s: Subspace) -> int:
    cur, k = s, 0
    while cur.dim:
        cur = bracket_space(g, s, cur)
        k += 1
        if k > s.dim + 1:
            raise ValueError("not nilpotent")
    return k


def roots_table(rd: RootSpaceDecomposition) -> dict:
    """JSON-ready summary used by the ``roots`` CLI subcommand."""
    cls = classify_root_system(rd)
    pos = set(rd.positive_roots)
    return {
        "type": cls["label"],
        "rank": rd.rank,
        "roots": [
            {
                "coords": [exact.fmt(x) for x in r.coords],
                "mult": r.multiplicity,
                "positive": r.coords in pos,
            }
            for r in rd.roots
        ],
        "simple": [[exact.fmt(x) for x in a] for a in rd.simple_roots],
        "dims": rd.dims(),
        "cartan_matrix": cls["cartan_matrix"],
        "h_reg": [exact.fmt(x) for x in rd.h_reg],
    }
