from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import exact, liealg, rootspace

from conftest import algebra, roots

LABELS = {
    "sl2r": "A1", "sl3r": "A2", "su21": "BC1", "su31": "BC1", "su32": "BC2",
    "so21": "A1", "so32": "B2", "sl2r+sl2r": "A1xA1",
}

# classical restricted-root data: su(p,q), p > q, is BC_q with mult(e_i) = 2(p-q),
# mult(2e_i) = 1, mult(e_i +- e_j) = 2; so(p,q), p > q, is B_q with mult(e_i) = p-q,
# mult(e_i +- e_j) = 1; split forms have every multiplicity 1.
POSITIVE_MULTS = {
    "sl2r": {1: 1},
    "sl3r": {1: 3},
    "su21": {2: 1, 1: 1},
    "su31": {4: 1, 1: 1},
    "su32": {2: 4, 1: 2},
    "so21": {1: 1},
    "so32": {1: 4},
    "sl2r+sl2r": {1: 2},
}
# dim of m = centralizer of a in k; for su(p,q) it is su(p-q) + u(1)^q
M_DIMS = {"sl2r": 0, "sl3r": 0, "su21": 1, "su31": 4, "su32": 2, "so21": 0, "so32": 0, "sl2r+sl2r": 0}


@pytest.mark.parametrize("name", sorted(LABELS))
def test_classification(name):
    assert rootspace.classify_root_system(roots(name))["label"] == LABELS[name]


@pytest.mark.parametrize("name", sorted(LABELS))
def test_multiplicities_and_dimension_count(name):
    rd = roots(name)
    pos = [rd.multiplicity(a) for a in rd.positive_roots]
    assert dict(Counter(pos)) == POSITIVE_MULTS[name]
    dims = rd.dims()
    assert dims["k0"] == M_DIMS[name]
    assert dims["g0"] == dims["a"] + dims["k0"]
    assert dims["g"] == dims["g0"] + 2 * dims["n"] == dims["g0"] + 2 * sum(pos)


def reflect(rd, alpha, beta):
    c = 2 * rd.inner(beta, alpha) / rd.inner(alpha, alpha)
    return tuple(b - c * a for a, b in zip(alpha, beta))


@pytest.mark.parametrize("name", ["sl3r", "su32", "so32", "sl2r+sl2r"])
def test_weyl_reflections_preserve_roots_with_multiplicity(name):
    rd = roots(name)
    root_set = set(rd.root_set)
    for a in rd.simple_roots:
        for b in rd.root_set:
            rb = reflect(rd, a, b)
            assert rb in root_set
            assert rd.multiplicity(rb) == rd.multiplicity(b)
            # integrality of the Cartan integers
            assert (2 * rd.inner(b, a) / rd.inner(a, a)).denominator == 1


@pytest.mark.parametrize("name", sorted(LABELS))
def test_root_vectors_are_eigenvectors_and_theta_swaps(name):
    rd, g = roots(name), algebra(name)
    for r in rd.roots:
        space = rd.space(r.coords)
        neg = rd.space(tuple(-x for x in r.coords))
        for x in space.basis:
            for h, val in zip(rd.a_basis, r.coords):
                assert exact.is_zero(liealg.bracket(g, h, x) - val * x)
            assert neg.contains(g.theta @ x)


@pytest.mark.parametrize("name", sorted(LABELS))
def test_positive_roots_are_nonnegative_integer_combinations(name):
    rd = roots(name)
    for a in rd.positive_roots:
        coeffs = rd.simple_coefficients(a)
        assert all(c.denominator == 1 and c >= 0 for c in coeffs)
    for a in rd.root_set:
        assert (a in set(rd.positive_roots)) != (tuple(-x for x in a) in set(rd.positive_roots))


@pytest.mark.parametrize("name", sorted(LABELS))
def test_decomposition_checks(name):
    assert all(rootspace.check_decomposition(roots(name)).values())


def test_simple_root_order_ends_with_the_root_doubled_in_bc():
    rd = roots("su32")
    last = rd.simple_roots[-1]
    assert tuple(2 * x for x in last) in set(rd.root_set)
    assert tuple(2 * x for x in rd.simple_roots[0]) not in set(rd.root_set)


def test_n_is_nilpotent_and_bracket_grading():
    rd, g = roots("su32"), algebra("su32")
    assert rootspace.is_nilpotent(g, rd.n)
    # the highest root 2e1 = 2a1 + 2a2 has height 4
    assert rootspace.nilpotency_degree(g, rd.n) == 4


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_h_reg_override_gives_same_root_set(seed):
    g = algebra("sl3r")
    rng = np.random.default_rng(seed)
    base = roots("sl3r")
    h = [exact.q(int(x)) for x in rng.integers(-9, 10, 2)]
    if any(sum(c * x for c, x in zip(a, h)) == 0 for a in base.root_set):
        return
    rd = rootspace.root_decompose(g, h_reg=h)
    assert set(rd.root_set) == set(base.root_set)
    assert all(sum(c * x for c, x in zip(a, h)) > 0 for a in rd.positive_roots)
