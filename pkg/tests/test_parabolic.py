import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import exact, parabolic, rootspace
from horolab.parabolic import PhiSubset

from conftest import ACCEPTANCE_ALGEBRAS, algebra, parab, roots


def all_phi(name):
    return [tuple(p.indices) for p in parabolic.all_subsets(roots(name).rank)]


def dims_oracle(name, phi):
    """Dimensions from root data alone: sum multiplicities of roots in / out of span(phi)."""
    rd = roots(name)
    simple = rd.simple_roots
    in_span = [a for a in rd.positive_roots if all(c == 0 for i, c in enumerate(rd.simple_coefficients(a), 1) if i not in phi)]
    m_in = sum(rd.multiplicity(a) for a in in_span)
    m_out = sum(rd.multiplicity(a) for a in rd.positive_roots) - m_in
    g0 = rd.dims()["g0"]
    return {"a_phi": len(simple) - len(phi), "n_phi": m_out, "l": g0 + 2 * m_in, "q": g0 + 2 * m_in + m_out}


@pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS)
def test_dimensions_match_root_count(name):
    for phi in all_phi(name):
        d = parab(name, phi).dims()
        assert {k: d[k] for k in ("a_phi", "n_phi", "l", "q")} == dims_oracle(name, phi)


def test_sl3_phi1_frozen_dimensions():
    d = parab("sl3r", (1,)).dims()
    assert (d["l"], d["g_phi"], d["n_phi"], d["a_phi"], d["q"]) == (4, 3, 2, 1, 6)


@pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS)
def test_structural_checks_every_phi(name):
    for phi in all_phi(name):
        bad = [k for k, v in parabolic.check_parabolic(parab(name, phi)).items() if not v]
        assert not bad, (phi, bad)


@pytest.mark.parametrize("name", ["sl3r", "su21", "so32"])
def test_parabolic_is_self_normalizing(name):
    g = algebra(name)
    for phi in all_phi(name):
        q = parab(name, phi).q
        assert parabolic.normalizer_in(g, q) == q


@pytest.mark.parametrize("name", ["sl3r", "su32", "so32", "sl2r+sl2r"])
def test_monotone_in_phi(name):
    subsets = all_phi(name)
    for a, b in itertools.product(subsets, subsets):
        if set(a) <= set(b):
            pa, pb = parab(name, a), parab(name, b)
            assert pb.q.contains_space(pa.q)
            assert pa.nphi.contains_space(pb.nphi)
            assert pa.aphi.contains_space(pb.aphi)
            assert pb.gphi.contains_space(pa.gphi)


@pytest.mark.parametrize(
    "name, phi, label, mults",
    [
        ("su32", (2,), "BC1", [2, 1]),
        ("su32", (1,), "A1", [2]),
        ("so32", (2,), "A1", [1]),
        ("so32", (1,), "A1", [1]),
        ("sl3r", (1,), "A1", [1]),
        ("su32", (1, 2), "BC2", [2, 2, 1, 2, 1, 2]),
    ],
)
def test_boundary_component_type(name, phi, label, mults):
    bc = parabolic.boundary_component_algebra(parab(name, phi))
    assert rootspace.classify_root_system(bc.roots)["label"] == label
    assert sorted(bc.roots.multiplicity(a) for a in bc.roots.positive_roots) == sorted(mults)
    assert bc.algebra.dim == parab(name, phi).gphi.dim


@pytest.mark.parametrize(
    "name, phi, expected",
    [
        ("sl3r", (1,), False),
        ("sl3r", (), True),
        ("sl3r", (1, 2), True),
        ("sl2r+sl2r", (1,), True),
        ("su32", (2,), False),
        ("so32", (1,), False),
    ],
)
def test_orthogonality(name, phi, expected):
    assert parabolic.orthogonality_test(roots(name), phi) is expected


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(1, 2)))
def test_split_is_direct_and_complementary(phi):
    pd = parab("su32", tuple(sorted(phi)))
    rd = roots("su32")
    assert pd.ideal.intersect(pd.section).dim == 0
    assert pd.ideal + pd.section == rd.a + rd.n
    assert pd.aphi.dim + pd.a_sup.dim == rd.rank


def test_phi_parsing_and_validation():
    assert PhiSubset.parse("2,1").indices == (1, 2)
    assert PhiSubset.parse("").indices == ()
    assert PhiSubset.parse(None).indices == ()
    with pytest.raises(ValueError):
        PhiSubset.parse("3").validate(2)
    with pytest.raises(ValueError):
        parabolic.boundary_component_algebra(parab("sl3r", ()))


def test_sigma_phi_is_closed_under_negation():
    pd = parab("su32", (2,))
    s = set(pd.sigma_phi)
    assert all(tuple(-x for x in a) in s for a in s)
    assert len(pd.sigma_phi) == 2 * len(pd.sigma_phi_plus)
    assert exact.direct_sum_ok([pd.l, pd.nphi])
