import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import exact, liealg, parabolic, solvgeom
from horolab.exact import Subspace

from conftest import ACCEPTANCE_ALGEBRAS, algebra, horo, model, roots


def p_image(mdl, x):
    """Exact (X - theta X)/2 in g coordinates."""
    g = mdl.g
    v = mdl.to_g(x)
    return (v - g.theta @ v) / 2


def symmetric_sectional(mdl, x, y):
    """Sectional curvature of G/K on p: B([X,Y],[X,Y]) / (|X|^2|Y|^2 - <X,Y>^2) with metric B on p."""
    g = mdl.g
    px, py = p_image(mdl, x), p_image(mdl, y)
    c = liealg.bracket(g, px, py)
    B = g.killing_form
    return B(c, c) / (B(px, px) * B(py, py) - B(px, py) ** 2)


@pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS)
def test_model_self_checks(name):
    assert all(solvgeom.model_checks(model(name)).values())


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["sl2r", "sl3r", "su21", "so32"]), st.integers(0, 2**32 - 1))
def test_sectional_curvature_matches_symmetric_space_formula(name, seed):
    mdl = model(name)
    rng = np.random.default_rng(seed)
    x, y = (exact.qarray(rng.integers(-3, 4, mdl.dim)) for _ in range(2))
    if exact.rank(np.array([x, y], dtype=object)) < 2:
        return
    assert mdl.sectional_curvature(x, y) == symmetric_sectional(mdl, x, y)


@pytest.mark.parametrize("name", ["sl2r", "sl3r", "su21", "so32", "sl2r+sl2r"])
def test_ricci_is_minus_half_metric(name):
    # the Killing metric on G/K is Einstein with Ric = -g/2
    mdl = model(name)
    assert np.allclose(mdl.ricci(), -0.5 * mdl.float_metric, atol=1e-12)
    assert mdl.scalar_curvature() == pytest.approx(-0.5 * mdl.dim)


def test_frozen_curvature_values():
    assert model("sl2r").sectional_curvature(*exact.qeye(2)) == Fraction(-1, 2)
    assert solvgeom.sectional_curvature_range(model("su21")) == (Fraction(-1, 3), Fraction(-1, 12))
    assert model("sl3r").scalar_curvature() == pytest.approx(-2.5)


def test_a_is_flat_and_section_is_not():
    mdl = model("su32")
    a = Subspace.span(list(exact.qeye(mdl.dim)[: roots("su32").rank]), mdl.dim)
    assert solvgeom.is_flat(mdl, a)
    hs = horo("su32", (2,))
    lo, hi = solvgeom.sectional_curvature_range(mdl, hs.section)
    assert lo < 0
    assert not solvgeom.is_flat(mdl, hs.section)


def half_plane_distance(mats):
    """Hyperbolic distance from i to g.i in the upper half plane (curvature -1)."""
    a, b, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 1]
    z = (a * 1j + b) / d
    return np.arccosh(1 + np.abs(z - 1j) ** 2 / (2 * z.imag))


def test_sl2_distance_matches_half_plane():
    mdl = model("sl2r")
    rng = np.random.default_rng(3)
    mats = solvgeom.group_exp(mdl, solvgeom.random_an(mdl, rng, 50, 2.0))
    # curvature -1/2 scales lengths by sqrt(2)
    assert np.allclose(solvgeom.symmetric_distance(mdl, mats), math.sqrt(2) * half_plane_distance(mats), atol=1e-10)


def test_horocycle_mean_curvature_is_sqrt_minus_k():
    mdl = model("sl2r")
    n = Subspace.span([exact.qeye(2)[1]], 2)
    orbit = solvgeom.orbit_second_fundamental_form(mdl, n)
    H = orbit.mean_curvature
    assert mdl.inner(H, H) == Fraction(1, 2)


@pytest.mark.parametrize("name", ACCEPTANCE_ALGEBRAS)
def test_ideal_orbits_minimal_and_totally_geodesic_criterion(name):
    rd = roots(name)
    for p in parabolic.all_subsets(rd.rank):
        phi = tuple(p.indices)
        hs = horo(name, phi)
        orbit = solvgeom.orbit_second_fundamental_form(model(name), hs.ideal)
        assert exact.is_zero(orbit.mean_curvature)
        assert orbit.totally_geodesic == parabolic.orthogonality_test(rd, phi)
        assert all(solvgeom.horospherical_checks(hs).values())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exp_log_round_trip(seed):
    mdl = model("su21")
    x = solvgeom.random_an(mdl, np.random.default_rng(seed), 5, 1.5)
    assert np.allclose(solvgeom.group_log(mdl, solvgeom.group_exp(mdl, x)), x, atol=1e-9)


def test_log_rejects_elements_outside_an():
    mdl = model("sl2r")
    spd = np.array([[2.0, 1.0], [1.0, 1.0]])  # real log, symmetric, so outside a + n
    with pytest.raises(solvgeom.MembershipError):
        solvgeom.group_log(mdl, spd[None])
    rot = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])  # log lies in k
    with pytest.raises(solvgeom.MembershipError):
        solvgeom.group_log(mdl, rot[None])
    with pytest.raises(solvgeom.LogRangeError):
        solvgeom.matrix_log(np.array([[-1.0, 1.0], [0.0, -1.0]])[None])
    with pytest.raises(solvgeom.LogRangeError):
        solvgeom.matrix_log(np.diag([-1.0, -1.0])[None])


@pytest.mark.parametrize("name, phi", [("sl3r", (1,)), ("su32", (2,)), ("so32", (1,)), ("sl2r+sl2r", (2,))])
def test_factorization(name, phi):
    hs = horo(name, phi)
    mats = solvgeom.group_exp(hs.model, solvgeom.random_an(hs.model, np.random.default_rng(0), 100))
    res = solvgeom.factorization_residuals(hs, mats)
    assert max(res.values()) < 1e-9
    h, s = solvgeom.horospherical_factorize(hs, mats)
    # log(s) lies in the section: projecting it changes nothing
    xs = solvgeom.group_log(hs.model, s)
    assert np.allclose(xs @ hs.float_projection.T, xs, atol=1e-9)


def test_projection_is_a_homomorphism_onto_the_section():
    hs = horo("su32", (2,))
    mdl = hs.model
    P = hs.projection
    rng = np.random.default_rng(5)
    for _ in range(5):
        x, y = (exact.qarray(rng.integers(-2, 3, mdl.dim)) for _ in range(2))
        assert exact.is_zero(P @ mdl.bracket(x, y) - mdl.bracket(P @ x, P @ y))


@pytest.mark.parametrize("name", ["sl2r", "sl3r", "su21"])
def test_geodesic_routes_agree_and_conserve_energy(name):
    mdl = model(name)
    rng = np.random.default_rng(11)
    v = rng.normal(size=(4, mdl.dim))
    v /= mdl.norm(v)[:, None]
    p = np.broadcast_to(np.eye(mdl.rep_dim), (4, mdl.rep_dim, mdl.rep_dim))
    rk = solvgeom.geodesic(mdl, p, v, 1.0)
    S, vel = solvgeom.symmetric_geodesic(mdl, v, 1.0)
    assert np.abs(rk.points - S).max() < 1e-8
    assert np.abs(rk.velocity - vel).max() < 1e-8
    assert np.max(rk.energy_drift) < 1e-8
    # unit-speed geodesics in a Hadamard manifold minimize
    assert np.allclose(solvgeom.symmetric_distance(mdl, S), 1.0, atol=1e-10)


def test_geodesic_is_left_equivariant():
    mdl = model("sl3r")
    rng = np.random.default_rng(2)
    g0 = solvgeom.group_exp(mdl, solvgeom.random_an(mdl, rng, 1))[0]
    v = rng.normal(size=(1, mdl.dim))
    a = solvgeom.geodesic(mdl, np.eye(3)[None], v, 0.7).points
    b = solvgeom.geodesic(mdl, g0[None], v, 0.7).points
    assert np.allclose(g0 @ a, b, atol=1e-10)
