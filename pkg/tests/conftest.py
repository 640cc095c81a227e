import functools

import pytest

from horolab import liealg, parabolic, rootspace, solvgeom

ACCEPTANCE_ALGEBRAS = ("sl2r", "sl3r", "su21", "su31", "su32", "so32", "sl2r+sl2r")


@functools.lru_cache(maxsize=None)
def algebra(name):
    return liealg.build_from_catalog(name)


@functools.lru_cache(maxsize=None)
def roots(name):
    return rootspace.root_decompose(algebra(name))


@functools.lru_cache(maxsize=None)
def model(name):
    return solvgeom.build_model(roots(name))


@functools.lru_cache(maxsize=None)
def parab(name, phi):
    return parabolic.build_parabolic(roots(name), phi)


@functools.lru_cache(maxsize=None)
def horo(name, phi):
    return solvgeom.horospherical(model(name), parab(name, phi))


@pytest.fixture
def build():
    return {"algebra": algebra, "roots": roots, "model": model, "parab": parab, "horo": horo}
