from fractions import Fraction

import numpy as np
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import exact
from horolab.exact import Subspace

ints = st.integers(-4, 4)


def int_matrix(rows, cols):
    return st.lists(st.lists(ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), int_matrix(n, n))))
def test_det_and_inverse_match_sympy(data):
    n, rows = data
    m = exact.qarray(rows)
    ref = sympy.Matrix(rows)
    assert exact.det(m) == Fraction(int(ref.det()))
    if ref.det() != 0:
        inv = exact.inverse(m)
        ref_inv = ref.inv()
        assert all(inv[i, j] == Fraction(str(ref_inv[i, j])) for i in range(n) for j in range(n))


@settings(max_examples=60, deadline=None)
@given(st.tuples(st.integers(1, 5), st.integers(1, 6)).flatmap(lambda s: int_matrix(*s)))
def test_rank_rref_nullspace_match_sympy(rows):
    m = exact.qarray(rows)
    ref = sympy.Matrix(rows)
    assert exact.rank(m) == ref.rank()
    r, piv = exact.rref(m)
    ref_r, ref_piv = ref.rref()
    assert list(piv) == list(ref_piv)
    assert all(r[i, j] == Fraction(str(ref_r[i, j])) for i in range(len(piv)) for j in range(ref.cols))
    ns = exact.nullspace(m)
    assert len(ns) == ref.cols - ref.rank()
    for v in ns:
        assert exact.is_zero(exact.qmatmul(m, np.array(v, dtype=object).reshape(-1, 1)))


@settings(max_examples=40, deadline=None)
@given(int_matrix(3, 5), int_matrix(2, 5))
def test_subspace_dimension_formula(a, b):
    u = Subspace.span([exact.qarray(r) for r in a], 5)
    v = Subspace.span([exact.qarray(r) for r in b], 5)
    assert (u + v).dim + u.intersect(v).dim == u.dim + v.dim
    assert (u + v).contains_space(u) and u.contains_space(u.intersect(v))


@settings(max_examples=40, deadline=None)
@given(int_matrix(2, 4))
def test_orthocomplement_is_orthogonal(rows):
    gram = exact.qarray([[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 3, 1], [0, 0, 1, 1]])
    u = Subspace.span([exact.qarray(r) for r in rows], 4)
    w = u.orthocomplement(gram)
    assert u.dim + w.dim == 4
    assert u.intersect(w).dim == 0
    for x in u.basis:
        for y in w.basis:
            assert x @ gram @ y == 0


def test_positive_definite_by_minors():
    assert exact.is_positive_definite(exact.qarray([[2, -1], [-1, 2]]))
    assert not exact.is_positive_definite(exact.qarray([[1, 2], [2, 1]]))
    assert exact.leading_minors(exact.qarray([[2, -1], [-1, 2]])) == [2, 3]


def test_solve_inconsistent_returns_none():
    assert exact.solve(exact.qarray([[1, 1], [2, 2]]), exact.qarray([1, 3])) is None


def test_qmatmul_agrees_with_fraction_product():
    a = exact.qarray([[Fraction(1, 3), 2], [Fraction(-5, 7), 1]])
    b = exact.qarray([[1, Fraction(1, 2)], [0, Fraction(3, 4)]])
    assert (exact.qmatmul(a, b) == a.dot(b)).all()
