import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import exact, extendlab, liealg, parabolic, solvgeom
from horolab.exact import Subspace

from conftest import horo, model, parab


def doubled_root(mdl):
    roots = set(mdl.rd.root_set)
    return next(a for a in mdl.rd.positive_roots if tuple(2 * x for x in a) in roots)


def circle_curvature(r):
    # geodesic circle of radius r in the plane of curvature -1/2: c coth(c r) with c = 1/sqrt(2)
    c = 1 / math.sqrt(2)
    return c / math.tanh(c * r)


@pytest.mark.parametrize("radius", [0.5, 1.0, 1.5])
def test_circle_mean_curvature_oracle(radius):
    mdl = model("sl2r")
    sphere = extendlab.geodesic_sphere_family(mdl, Subspace.full(2), radius)
    geo = extendlab.local_geometry(sphere, sphere.sample(np.random.default_rng(0), 6, 0.01), 5e-4)
    assert np.abs(mdl.norm(geo.mean_curvature) - circle_curvature(radius)).max() < 1e-6


def test_fd_second_order_convergence():
    mdl = model("sl2r")
    sphere = extendlab.geodesic_sphere_family(mdl, Subspace.full(2), 1.0)
    nodes = sphere.sample(np.random.default_rng(1), 6, 0.01)
    steps = np.array([2e-3, 1e-3, 5e-4])
    errs = [np.abs(mdl.norm(extendlab.local_geometry(sphere, nodes, h).mean_curvature) - circle_curvature(1.0)).max() for h in steps]
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert slope > 1.8


@pytest.mark.parametrize("name, phi", [("sl3r", ()), ("sl3r", (1,)), ("sl3r", (2,)), ("su21", (1,)), ("so32", (2,))])
def test_orbit_fd_matches_algebra(name, phi):
    hs = horo(name, phi)
    for c in extendlab.orbit_fd_agreement(hs.model, hs.ideal, samples=6):
        assert c.passed, c


def test_radial_field_is_unit_normal():
    mdl = model("su21")
    sphere = extendlab.geodesic_sphere_family(mdl, Subspace.full(mdl.dim), 0.7)
    nodes = sphere.sample(np.random.default_rng(2), 5, 0.01)
    rad = extendlab.radial_geometry(sphere, nodes)
    assert np.allclose(mdl.norm(rad["normal"]), 1.0, atol=1e-12)
    assert rad["normal_tangent"].max() < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_hyperspherical_is_unit(k, seed):
    lo, hi, _ = extendlab._sphere_domain(k)
    ang = np.random.default_rng(seed).uniform(lo, hi, size=(4, k - 1))
    assert np.allclose(np.linalg.norm(extendlab.hyperspherical(ang, k), axis=1), 1.0)


@pytest.mark.parametrize("family", ["point", "geodesic", "geodesic_sphere", "horosphere"])
def test_theorem1_sl3(family):
    hs = horo("sl3r", (1,))
    mdl, pd = hs.model, hs.pd
    m = {
        "point": lambda: extendlab.point_family(mdl, hs.section),
        "geodesic": lambda: extendlab.geodesic_family(mdl, hs.section),
        "geodesic_sphere": lambda: extendlab.geodesic_sphere_family(mdl, hs.section, 0.8),
        "horosphere": lambda: extendlab.horosphere_family(mdl, mdl.subspace(pd.a_sup), mdl.subspace(pd.n_sup)),
    }[family]()
    checks = extendlab.verify_theorem1(m, hs, samples=8)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert any(c.id == "flat_normal_bundle_preserved" for c in checks)


def test_theorem1_is_deterministic():
    hs = horo("sl3r", (1,))
    m = extendlab.geodesic_family(hs.model, hs.section)
    a = [c.as_dict() for c in extendlab.verify_theorem1(m, hs, samples=5, seed=4)]
    b = [c.as_dict() for c in extendlab.verify_theorem1(m, hs, samples=5, seed=4)]
    assert a == b


def test_extension_rejects_patch_outside_section():
    hs = horo("sl3r", (1,))
    full = Subspace.full(hs.model.dim)
    with pytest.raises(ValueError):
        extendlab.canonical_extend(extendlab.geodesic_sphere_family(hs.model, full, 0.5), hs)


def test_extension_dimension_and_membership():
    hs = horo("su32", (2,))
    m = extendlab.geodesic_sphere_family(hs.model, hs.section, 0.6)
    ext = extendlab.canonical_extend(m, hs)
    assert ext.dim == m.dim + hs.ideal.dim
    assert ext.codim == m.codim_in_host == 1
    nodes = ext.sample(np.random.default_rng(0), 5)
    h, s = solvgeom.horospherical_factorize(hs, ext.points(nodes))
    # the section factor stays on the sphere
    _, centre = extendlab._basepoint(hs.model, hs.model.orthonormal_basis(hs.section), 0.3)
    d = solvgeom.symmetric_distance(hs.model, np.broadcast_to(centre, s.shape), s)
    assert np.allclose(d, 0.6, atol=1e-9)


def exact_normal_curvature_squared(mdl, tangent, normal):
    """|<R(X,Y)xi, eta>|^2 / (|X^Y|^2 |xi^eta|^2) through -B([[X,Y],xi], eta) on p, exactly."""
    g = mdl.g

    def p(x):
        v = mdl.to_g(x)
        return (v - g.theta @ v) / 2

    X, Y = (p(v) for v in tangent)
    xi, eta = (p(v) for v in normal)
    val = -g.killing_form(liealg.bracket(g, liealg.bracket(g, X, Y), xi), eta)
    B = g.killing_form
    wedge = lambda a, b: B(a, a) * B(b, b) - B(a, b) ** 2
    return val**2 / (wedge(X, Y) * wedge(xi, eta))


def test_normal_curvature_nonflat_control():
    # totally geodesic complex line A exp(g_2a) in the complex hyperbolic plane:
    # R^perp equals the ambient curvature term, which is not zero
    mdl = model("su21")
    alpha = doubled_root(mdl)
    fam = extendlab.build_Sw_family(mdl, alpha, [], (0.5,))
    orbit = solvgeom.orbit_second_fundamental_form(mdl, fam.subalg)
    assert orbit.totally_geodesic
    oracle = exact_normal_curvature_squared(mdl, list(fam.subalg.basis), list(fam.normal.basis))
    assert oracle == Fraction(1, 36)
    geo = extendlab.local_geometry(fam.orbit, fam.orbit.sample(np.random.default_rng(0), 4, 0.01))
    assert np.allclose(extendlab.normal_curvature_residual(mdl, geo), 1 / 6, atol=1e-8)


def test_normal_curvature_cancellation_is_not_vacuous():
    # on the sl3 ideal orbit the ambient and shape-operator terms are both nonzero and cancel
    hs = horo("sl3r", (1,))
    mdl = hs.model
    orbit = extendlab.subgroup_orbit(mdl, hs.ideal)
    geo = extendlab.local_geometry(orbit, orbit.sample(np.random.default_rng(0), 3, 0.01))
    assert extendlab.normal_curvature_residual(mdl, geo).max() < 1e-9
    pairs = itertools.combinations(list(hs.ideal.basis), 2)
    assert any(exact_normal_curvature_squared(mdl, xy, list(hs.section.basis)) != 0 for xy in pairs)


def test_sw_family_validation():
    mdl = model("su21")
    alpha = doubled_root(mdl)
    ga = extendlab.root_space(mdl, alpha)
    with pytest.raises(ValueError):
        extendlab.build_Sw_family(mdl, alpha, list(ga.basis), (0.5,))
    with pytest.raises(ValueError):
        extendlab.build_Sw_family(mdl, alpha, [exact.qeye(mdl.dim)[0]], (0.5,))


@pytest.mark.parametrize("w_dim", [0, 1])
def test_sw_tubes_are_cmc_su21(w_dim):
    mdl = model("su21")
    alpha = doubled_root(mdl)
    w = list(extendlab.root_space(mdl, alpha).basis[:w_dim])
    fam = extendlab.build_Sw_family(mdl, alpha, w, (0.4, 1.0))
    assert exact.is_zero(solvgeom.orbit_second_fundamental_form(mdl, fam.subalg).mean_curvature)
    checks = extendlab.isoparametric_check(fam, samples=10)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_kahler_generic_angle():
    mdl = model("su31")
    alpha = doubled_root(mdl)
    fam = extendlab.build_Sw_family(mdl, alpha, extendlab.kahler_generic_w(mdl, alpha), (0.5,))
    angles = extendlab.kahler_angles(mdl, alpha, fam.normal)
    assert np.allclose(angles, math.atan(0.5), atol=1e-12)
    assert 0 < angles[0] < math.pi / 2
    # a complex w has a complex complement (angle 0), a real one a totally real complement
    J = extendlab.complex_structure(mdl, alpha)
    assert J is not None


def test_spheres_equidistant_after_extension():
    hs = horo("so32", (2,))
    leaves = [extendlab.geodesic_sphere_family(hs.model, hs.section, r) for r in (0.4, 0.8)]
    ext, checks = extendlab.parallel_family_extend(leaves, hs, samples=6)
    assert all(c.passed for c in checks)
    assert len(ext) == 2 and ext[0].codim == 1


def ch2_sphere_mean_curvature(r):
    # complex hyperbolic plane with holomorphic curvature -1/3, i.e. 12 times the metric of
    # holomorphic curvature -4, where the principal curvatures are 2 coth 2t and coth t (twice)
    t = r / math.sqrt(12)
    return (2 / math.tanh(2 * t) + 2 / math.tanh(t)) / math.sqrt(12)


@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_complex_hyperbolic_sphere_oracle(radius):
    mdl = model("su21")
    sphere = extendlab.geodesic_sphere_family(mdl, Subspace.full(mdl.dim), radius)
    geo = extendlab.local_geometry(sphere, sphere.sample(np.random.default_rng(0), 6, 0.01), 5e-4)
    assert np.abs(mdl.norm(geo.mean_curvature) - ch2_sphere_mean_curvature(radius)).max() < 1e-6
