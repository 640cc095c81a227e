"""Sampled submanifolds of the solvable model, their canonical extension by the
horospherical ideal subgroup, and finite-difference extrinsic geometry.

A submanifold is a chart ``params -> group matrices``.  Tangent vectors, second
fundamental forms and mean curvature vectors are left-trivialized, so they can
be compared across points related by a left translation without transport.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import exact
from .exact import Subspace
from .liealg import bracket as g_bracket
from .report import CheckResult, exact_check
from .rootspace import Root, centralizer_in
from .solvgeom import (
    Horospherical,
    SolvableModel,
    geodesic,
    group_exp,
    horospherical_factorize,
    matrix_log,
    membership_residual,
    normal_projector,
    orbit_second_fundamental_form,
    symmetric_distance,
    symmetric_geodesic,
)

Chart = Callable[[np.ndarray], np.ndarray]

_CHUNK = 4096


class FrameRankError(ValueError):
    pass


class BoundaryNodeError(ValueError):
    pass


class OrientationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SampledSubmanifold:
    model: SolvableModel
    chart: Chart  # (N, d) parameters -> (N, n, n) points of AN
    dim: int
    domain: tuple[np.ndarray, np.ndarray]  # box containing the chart parameters
    provenance: dict
    host: Subspace | None = None  # totally geodesic subgroup (a + n coords) the patch lives in
    radial: Callable[[np.ndarray], np.ndarray] | None = None  # unit normal hint for tubes
    periodic: tuple[bool, ...] = ()

    @property
    def codim(self) -> int:
        return self.model.dim - self.dim

    @property
    def codim_in_host(self) -> int:
        host_dim = self.host.dim if self.host is not None else self.model.dim
        return host_dim - self.dim

    def points(self, params) -> np.ndarray:
        params = _as_params(params, self.dim)
        out = [self.chart(params[i : i + _CHUNK]) for i in range(0, len(params), _CHUNK)]
        return np.concatenate(out, axis=0) if out else np.zeros((0, self.model.rep_dim, self.model.rep_dim))

    def sample(self, rng: np.random.Generator, count: int, margin: float = 0.0) -> np.ndarray:
        lo, hi = self.domain
        return rng.uniform(lo + margin, hi - margin, size=(count, self.dim))

    def check_interior(self, params: np.ndarray, step: float) -> None:
        lo, hi = self.domain
        per = np.array(self.periodic or (False,) * self.dim, dtype=bool)
        bad = ((params - step < lo) | (params + step > hi)) & ~per
        if np.any(bad):
            raise BoundaryNodeError("node too close to the parameter-box boundary for central differences")


def _as_params(params, dim: int) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.ndim == 2 and params.shape[1] == dim:
        return params
    return params.reshape(-1, dim)


# ---- finite-difference geometry ----------------------------------------


@dataclass(frozen=True)
class LocalGeometry:
    params: np.ndarray
    points: np.ndarray  # (K, n, n)
    tangent: np.ndarray  # (K, d, m)
    gram: np.ndarray  # (K, d, d)
    covariant: np.ndarray  # (K, d, d, m): nabla_{d_i} d_j
    second_fundamental_form: np.ndarray  # (K, d, d, m)
    mean_curvature: np.ndarray  # (K, m)
    normal: np.ndarray  # (K, k, m), metric-orthonormal

    def normal_project(self, model: SolvableModel, v: np.ndarray) -> np.ndarray:
        """Metric-orthogonal projection of left-trivialized vectors v (K, ..., m) onto the normal space."""
        G = model.float_metric
        coef = np.einsum("k...i,ij,kaj->k...a", v, G, self.normal)
        return np.einsum("k...a,kai->k...i", coef, self.normal)


def _stencil(d: int, h: float) -> np.ndarray:
    eye = np.eye(d)
    offs = [np.zeros(d)]
    for i in range(d):
        offs += [h * eye[i], -h * eye[i]]
    for i in range(d):
        for j in range(i + 1, d):
            offs += [h * (eye[i] + eye[j]), h * (eye[i] - eye[j]), h * (-eye[i] + eye[j]), -h * (eye[i] + eye[j])]
    return np.array(offs).reshape(-1, d)


def _local_log(model: SolvableModel, base: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """a + n coordinates of log(base^-1 pts); base (K, n, n), pts (K, S, n, n)."""
    z = np.linalg.solve(base[:, None], pts)
    lg = matrix_log(z)
    x, _ = model.coords_of_matrix(lg)
    return x


def local_geometry(sub: SampledSubmanifold, params, step: float = 1e-3, check_boundary: bool = True) -> LocalGeometry:
    """Second fundamental form and mean curvature by central differences in a local log chart.

    With x(u) = log(p(u0)^-1 p(u)), the left-trivialized frame is tau_i = d_i x
    and nabla_{d_i} d_j = d_i d_j x + (nabla_{tau_i} tau_j + nabla_{tau_j} tau_i)/2
    at u0; the normal part of the latter is II.
    """
    model = sub.model
    params = _as_params(params, sub.dim)
    K, d, m = len(params), sub.dim, model.dim
    if K == 0:
        raise ValueError("no nodes given")
    if check_boundary and d:
        sub.check_interior(params, step)
    sten = _stencil(d, step)
    S = len(sten)
    pts = sub.points((params[:, None, :] + sten[None]).reshape(-1, d)).reshape(K, S, model.rep_dim, model.rep_dim)
    base = pts[:, 0]
    x = np.concatenate([_local_log(model, base[i : i + 256], pts[i : i + 256]) for i in range(0, K, 256)], axis=0)
    x0 = x[:, 0]
    tan = np.zeros((K, d, m))
    hess = np.zeros((K, d, d, m))
    for i in range(d):
        xp, xm = x[:, 1 + 2 * i], x[:, 2 + 2 * i]
        tan[:, i] = (xp - xm) / (2 * step)
        hess[:, i, i] = (xp + xm - 2 * x0) / step**2
    k = 1 + 2 * d
    for i in range(d):
        for j in range(i + 1, d):
            pp, pm, mp, mm = x[:, k], x[:, k + 1], x[:, k + 2], x[:, k + 3]
            hess[:, i, j] = hess[:, j, i] = (pp - pm - mp + mm) / (4 * step**2)
            k += 4
    cov = hess + model.nabla_sym(tan[:, :, None, :], tan[:, None, :, :])
    return _finish_geometry(model, params, base, tan, cov)


def _finish_geometry(model, params, base, tan, cov) -> LocalGeometry:
    K, d, m = tan.shape
    G = model.float_metric
    L = model.chol
    if d:
        on = tan @ L  # orthonormal coordinates
        sv = np.linalg.svd(on, compute_uv=False)
        if np.any(sv[:, -1] < 1e-8 * np.maximum(sv[:, 0], 1e-300)):
            raise FrameRankError("tangent frame is rank deficient at a node")
        _, _, vt = np.linalg.svd(on, full_matrices=True)
        normal_on = vt[:, d:, :]
        gram = np.einsum("kai,ij,kbj->kab", tan, G, tan)
    else:
        normal_on = np.broadcast_to(np.eye(m), (K, m, m))
        gram = np.zeros((K, 0, 0))
    normal = np.linalg.solve(L.T, np.swapaxes(normal_on, 1, 2))
    normal = np.swapaxes(normal, 1, 2)
    coef = np.einsum("kabi,ij,knj->kabn", cov, G, normal)
    ii = np.einsum("kabn,kni->kabi", coef, normal)
    if d:
        ginv = np.linalg.inv(gram)
        H = np.einsum("kab,kabi->ki", ginv, ii)
    else:
        H = np.zeros((K, m))
    return LocalGeometry(
        params=params,
        points=base,
        tangent=tan,
        gram=gram,
        covariant=cov,
        second_fundamental_form=ii,
        mean_curvature=H,
        normal=normal,
    )


def second_fundamental_form_fd(sub: SampledSubmanifold, node, step: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    geo = local_geometry(sub, np.asarray(node, dtype=float).reshape(1, sub.dim), step)
    return geo.second_fundamental_form[0], geo.mean_curvature[0]


def radial_geometry(sub: SampledSubmanifold, params, step: float = 1e-3) -> dict:
    """Shape operator of a hypersurface from its unit normal field (first differences only).

    Returns the normal field N, the mean curvature -tr(A_N) = <H, N>, and
    |<nabla N, N>| (zero for a unit field in the normal connection).
    """
    if sub.radial is None:
        raise ValueError("patch carries no normal field")
    model = sub.model
    params = np.asarray(params, dtype=float).reshape(-1, sub.dim)
    K, d, m = len(params), sub.dim, model.dim
    sten = _stencil(d, step)[: 1 + 2 * d]
    flat = (params[:, None, :] + sten[None]).reshape(-1, d)
    pts = sub.points(flat).reshape(K, len(sten), model.rep_dim, model.rep_dim)
    x = _local_log(model, pts[:, 0], pts)
    nfield = sub.radial(flat).reshape(K, len(sten), m)
    tan = (x[:, 1::2] - x[:, 2::2]) / (2 * step)
    dn = (nfield[:, 1::2] - nfield[:, 2::2]) / (2 * step)
    n0 = nfield[:, 0]
    cov_n = dn + model.nabla(tan, np.broadcast_to(n0[:, None, :], tan.shape))
    G = model.float_metric
    gram = np.einsum("kai,ij,kbj->kab", tan, G, tan)
    shape = -np.einsum("kai,ij,kbj->kab", cov_n, G, tan)
    mean = np.einsum("kab,kab->k", np.linalg.inv(gram), shape) if d else np.zeros(K)
    return {
        "normal": n0,
        "tangent": tan,
        "mean_curvature": mean,
        "normal_parallel": np.abs(np.einsum("kai,ij,kj->ka", cov_n, G, n0)).max(axis=1) if d else np.zeros(K),
        "normal_tangent": np.abs(np.einsum("kai,ij,kj->ka", tan, G, n0)).max(axis=1) if d else np.zeros(K),
    }


def normal_curvature_residual(model: SolvableModel, geo: LocalGeometry) -> np.ndarray:
    """Size of the normal curvature R^perp per node, through the Ricci equation.

    <R^perp(X,Y) xi, eta> = <R(X,Y) xi, eta> + <[A_xi, A_eta] X, Y>, where
    <A_xi X, Y> = <II(X,Y), xi>.
    """
    K, d, m = geo.tangent.shape
    G = model.float_metric
    out = np.zeros(K)
    kdim = geo.normal.shape[1]
    if d < 2 or kdim < 2:
        return out
    for k in range(K):
        tan, nor = geo.tangent[k], geo.normal[k]
        ginv = np.linalg.inv(geo.gram[k])
        sform = np.einsum("abi,ij,nj->nab", geo.second_fundamental_form[k], G, nor)
        shape = ginv @ sform  # A_n as endomorphisms in the tangent basis
        worst = 0.0
        for i in range(d):
            for j in range(i + 1, d):
                area = math.sqrt(max(geo.gram[k, i, i] * geo.gram[k, j, j] - geo.gram[k, i, j] ** 2, 1e-300))
                for a in range(kdim):
                    for b in range(a + 1, kdim):
                        amb = model.inner(model.curvature(tan[i], tan[j], nor[a]), nor[b])
                        comm = shape[a] @ shape[b] - shape[b] @ shape[a]
                        extr = geo.gram[k, j] @ comm[:, i]
                        worst = max(worst, abs(amb + extr) / area)
        out[k] = worst
    return out


def normal_within(model: SolvableModel, geo: LocalGeometry, host_on: np.ndarray, rank: int) -> LocalGeometry:
    """The same patch with its normal frame cut down to the normals inside a totally geodesic host."""
    G = model.float_metric
    frames = []
    for nor in geo.normal:
        proj = np.einsum("si,ij,nj,nl->sl", host_on, G, nor, nor)
        _, sv, vt = np.linalg.svd(proj @ model.chol, full_matrices=False)
        if rank and sv[rank - 1] < 1e-8:
            raise FrameRankError("normal space inside the host has lower rank than expected")
        frames.append(np.linalg.solve(model.chol.T, vt[:rank].T).T if rank else np.zeros((0, model.dim)))
    fields = {f: getattr(geo, f) for f in LocalGeometry.__dataclass_fields__}
    fields["normal"] = np.array(frames).reshape(len(geo.normal), rank, model.dim)
    return LocalGeometry(**fields)


def parallel_mean_curvature_residual(sub: SampledSubmanifold, params, step: float = 1e-3, outer: float = 1e-2) -> np.ndarray:
    """max_i |(nabla_{d_i} H)^perp| per node, with an outer central difference of H."""
    model = sub.model
    params = np.asarray(params, dtype=float).reshape(-1, sub.dim)
    d = sub.dim
    out = np.zeros(len(params))
    if d == 0:
        return out
    eye = np.eye(d)
    for k, u in enumerate(params):
        shifted = np.concatenate([u[None], u + outer * eye, u - outer * eye], axis=0)
        geo = local_geometry(sub, shifted, step)
        H = geo.mean_curvature
        tan = geo.tangent[0]
        dH = (H[1 : 1 + d] - H[1 + d :]) / (2 * outer) + model.nabla(tan, np.broadcast_to(H[0], tan.shape))
        proj = np.einsum("ai,ij,nj->an", dH, model.float_metric, geo.normal[0]) @ geo.normal[0]
        out[k] = float(np.max(model.norm(proj)))
    return out


# ---- builtin families ---------------------------------------------------


def hyperspherical(angles: np.ndarray, k: int) -> np.ndarray:
    """Unit vectors in R^k from k-1 angles (last angle periodic)."""
    angles = np.asarray(angles, dtype=float)
    n = angles.shape[0]
    out = np.ones((n, k))
    sin_prod = np.ones(n)
    for i in range(k - 1):
        out[:, i] = sin_prod * np.cos(angles[:, i])
        sin_prod = sin_prod * np.sin(angles[:, i])
    out[:, k - 1] = sin_prod
    return out


def _sphere_domain(k: int, margin: float = 0.35) -> tuple[np.ndarray, np.ndarray, tuple[bool, ...]]:
    lo = np.full(k - 1, margin)
    hi = np.full(k - 1, math.pi - margin)
    per = [False] * (k - 1)
    if k >= 2:
        lo[-1], hi[-1] = -math.pi, math.pi
        per[-1] = True
    return lo, hi, tuple(per)


def _basepoint(model: SolvableModel, host_on: np.ndarray, offset: float) -> tuple[np.ndarray, np.ndarray]:
    """A generic point exp(X) of the host subgroup, X a fixed combination of host vectors."""
    weights = np.array([1.0 / (1 + i) for i in range(len(host_on))])
    x = offset * (weights @ host_on) if len(host_on) else np.zeros(model.dim)
    return x, group_exp(model, x)


def point_family(model: SolvableModel, host: Subspace, offset: float = 0.3) -> SampledSubmanifold:
    on = model.orthonormal_basis(host)
    _, p = _basepoint(model, on, offset)

    def chart(u):
        return np.broadcast_to(p, (len(u),) + p.shape).copy()

    return SampledSubmanifold(model, chart, 0, (np.zeros(0), np.zeros(0)), {"family": "point", "offset": offset}, host)


def _direction(model: SolvableModel, on: np.ndarray, direction) -> np.ndarray:
    if direction is None:
        w = np.array([1.0 / (1 + i) ** 0.5 for i in range(len(on))])
        v = w @ on
    else:
        v = np.asarray(direction, dtype=float)
    return v / model.norm(v)


def geodesic_family(model: SolvableModel, host: Subspace, direction=None, offset: float = 0.3, length: float = 1.0) -> SampledSubmanifold:
    on = model.orthonormal_basis(host)
    _, p = _basepoint(model, on, offset)
    v = _direction(model, on, direction)

    def chart(u):
        pts, _ = symmetric_geodesic(model, np.broadcast_to(v, (len(u), model.dim)), u[:, 0])
        return p @ pts

    return SampledSubmanifold(
        model, chart, 1, (np.array([-length]), np.array([length])), {"family": "geodesic", "offset": offset, "length": length}, host
    )


def geodesic_sphere_family(model: SolvableModel, host: Subspace, radius: float = 1.0, offset: float = 0.3) -> SampledSubmanifold:
    on = model.orthonormal_basis(host)
    k = len(on)
    if k < 2:
        raise ValueError("a geodesic sphere needs a host of dimension >= 2")
    _, c = _basepoint(model, on, offset)
    lo, hi, per = _sphere_domain(k)

    def directions(u):
        return hyperspherical(u, k) @ on

    def chart(u):
        pts, _ = symmetric_geodesic(model, directions(u), np.full(len(u), radius))
        return c @ pts

    def radial(u):
        return symmetric_geodesic(model, directions(u), np.full(len(u), radius))[1]

    return SampledSubmanifold(
        model, chart, k - 1, (lo, hi), {"family": "geodesic_sphere", "radius": radius, "offset": offset}, host, radial, per
    )


def horosphere_family(model: SolvableModel, host_a: Subspace, host_n: Subspace, direction=None, offset: float = 0.3, half_width: float = 0.6) -> SampledSubmanifold:
    """Orbit of the subgroup with algebra (direction^perp in host_a) + host_n.

    For a rank-one host this is a horosphere centred at the point at infinity
    that ``direction`` points away from.
    """
    host = host_a + host_n
    on_a = model.orthonormal_basis(host_a)
    v = _direction(model, on_a, direction)
    comp = on_a - np.outer(model.inner(on_a, v), v)
    keep = [r for r in comp if model.norm(r) > 1e-12]
    rest = _orthonormalize(model, np.array(keep)) if keep else np.zeros((0, model.dim))
    sub_on = np.concatenate([rest, model.orthonormal_basis(host_n)], axis=0)
    on_host = model.orthonormal_basis(host)
    _, p = _basepoint(model, on_host, offset)
    d = len(sub_on)

    def chart(u):
        return p @ group_exp(model, u @ sub_on)

    return SampledSubmanifold(
        model,
        chart,
        d,
        (np.full(d, -half_width), np.full(d, half_width)),
        {"family": "horosphere", "offset": offset},
        host,
    )


def _orthonormalize(model: SolvableModel, rows: np.ndarray) -> np.ndarray:
    gram = rows @ model.float_metric @ rows.T
    return np.linalg.solve(np.linalg.cholesky(gram), rows)


def subgroup_orbit(model: SolvableModel, subalg: Subspace, half_width: float = 0.5, base=None, name: str = "orbit") -> SampledSubmanifold:
    on = model.orthonormal_basis(subalg)
    d = len(on)
    p = np.eye(model.rep_dim) if base is None else np.asarray(base)

    def chart(u):
        return p @ group_exp(model, u @ on)

    return SampledSubmanifold(model, chart, d, (np.full(d, -half_width), np.full(d, half_width)), {"family": name}, subalg)


def orbit_fd_agreement(
    model: SolvableModel, subalg: Subspace, *, samples: int = 8, seed: int = 0, step: float = 1e-3, tol: float = 1e-4
) -> list[CheckResult]:
    """Finite-difference II and mean curvature of a subgroup orbit against the exact algebraic values."""
    orbit = subgroup_orbit(model, subalg)
    alg = orbit_second_fundamental_form(model, subalg)
    if orbit.dim == 0:
        return [CheckResult("orbit_fd_vs_algebraic_II", 0.0, tol, info={"vacuous": True})]
    rng = np.random.default_rng(seed)
    geo = local_geometry(orbit, orbit.sample(rng, samples, 2 * step), step)
    P = exact.to_float(normal_projector(model, subalg))
    tan = geo.tangent
    ii_alg = np.einsum("ij,kabj->kabi", P, model.nabla_sym(tan[:, :, None, :], tan[:, None, :, :]))
    r_ii = model.norm(geo.second_fundamental_form - ii_alg).reshape(len(tan), -1).max(axis=1)
    r_h = model.norm(geo.mean_curvature - exact.to_float(alg.mean_curvature))
    return [_check("orbit_fd_vs_algebraic_II", r_ii, tol), _check("orbit_fd_vs_algebraic_mean_curvature", r_h, tol)]


# ---- canonical extension ------------------------------------------------


def canonical_extend(m: SampledSubmanifold, hs: Horospherical, half_width: float = 0.5, tol: float = 1e-9, probe: int = 8) -> SampledSubmanifold:
    """H.M for the ideal subgroup H, charted by (y, u) -> exp(Y(y)) m(u).

    The first ``dim ideal`` parameters are orthonormal coordinates on the ideal.
    """
    model = m.model
    ideal_on = model.orthonormal_basis(hs.ideal)
    dh = len(ideal_on)
    if half_width <= 0:
        raise ValueError("empty extension grid")
    rng = np.random.default_rng(0)
    samples = m.sample(rng, probe) if m.dim else np.zeros((1, 0))
    res = membership_residual(model, m.points(samples), hs.section)
    if np.max(res) > tol:
        raise ValueError(f"input patch is not in the section subgroup (residual {np.max(res):.2e})")

    def chart(p):
        y, u = p[:, :dh], p[:, dh:]
        return group_exp(model, y @ ideal_on) @ m.chart(u)

    radial = None
    if m.radial is not None:

        def radial(p):
            return m.radial(p[:, dh:])

    lo, hi = m.domain
    return SampledSubmanifold(
        model,
        chart,
        dh + m.dim,
        (np.concatenate([np.full(dh, -half_width), lo]), np.concatenate([np.full(dh, half_width), hi])),
        {"family": "extension", "of": m.provenance, "phi": list(hs.pd.phi.indices)},
        None,
        radial,
        (False,) * dh + tuple(m.periodic or (False,) * m.dim),
    )


def _worst(values: np.ndarray) -> tuple[float, int]:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0, -1
    k = int(np.argmax(values))
    return float(values[k]), k


def _check(name: str, values, tol: float, **info) -> CheckResult:
    worst, node = _worst(values)
    return CheckResult(name, worst, tol, node, info=info)


def verify_theorem1(
    m: SampledSubmanifold,
    hs: Horospherical,
    *,
    samples: int = 20,
    seed: int = 0,
    step: float = 1e-3,
    tol: float = 1e-4,
    minimal: bool | None = None,
    half_width: float = 0.5,
    preserved: bool | None = None,
    nested_tol: float = 1e-3,
) -> list[CheckResult]:
    """Sampled checks of the extension identities at nodes (y, u) of H.M.

    With ``preserved`` (default: inferred from the family) the input is also
    checked for parallel mean curvature and flat normal bundle, and the
    extension must keep both.  Parallel mean curvature nests two difference
    quotients and uses ``nested_tol``.
    """
    model = m.model
    ext = canonical_extend(m, hs, half_width)
    dh = ext.dim - m.dim
    rng = np.random.default_rng(seed)
    margin = 2 * step
    u = m.sample(rng, samples, margin) if m.dim else np.zeros((samples, 0))
    y = rng.uniform(-half_width + margin, half_width - margin, size=(samples, dh))
    nodes = np.concatenate([y, u], axis=1)
    at_section = np.concatenate([np.zeros_like(y), u], axis=1)
    geo = local_geometry(ext, np.concatenate([nodes, at_section]), step)
    g_ext = _slice_geometry(geo, slice(0, samples))
    g_sec = _slice_geometry(geo, slice(samples, 2 * samples))
    checks = []

    sec_on = model.orthonormal_basis(hs.section)
    codim_ok = ext.codim == m.codim_in_host and np.linalg.matrix_rank(g_ext.tangent[0] @ model.chol, tol=1e-8) == ext.dim
    checks.append(exact_check("codimension", bool(codim_ok), input=m.codim_in_host, extension=ext.codim))

    # (a) section-tangent block equals II of M inside the section
    if m.dim:
        gm = local_geometry(m, u, step)
        nabla_m = gm.covariant
        Gf = model.float_metric
        in_sec = np.einsum("kabi,ij,sj,sl->kabl", nabla_m, Gf, sec_on, sec_on)
        # remove the M-tangent part: project onto the normal of M that lies inside the section
        tg = gm.tangent
        ginv = np.linalg.inv(gm.gram)
        coef = np.einsum("kabi,ij,kcj->kabc", in_sec, Gf, tg)
        ii_m = in_sec - np.einsum("kabc,kcd,kdi->kabi", coef, ginv, tg)
        block = g_ext.second_fundamental_form[:, dh:, dh:]
        r = model.norm(block - ii_m).reshape(samples, -1).max(axis=1)
        checks.append(_check("II_section_block", r, tol))
    else:
        checks.append(CheckResult("II_section_block", 0.0, tol, info={"vacuous": True}))

    # (b) orbit-tangent block equals the projected orbit second fundamental form
    if dh:
        P = exact.to_float(normal_projector(model, hs.ideal))
        tan = g_ext.tangent[:, :dh]
        orbit_ii = np.einsum("ij,kabj->kabi", P, model.nabla_sym(tan[:, :, None, :], tan[:, None, :, :]))
        proj = g_ext.normal_project(model, orbit_ii)
        r = model.norm(g_ext.second_fundamental_form[:, :dh, :dh] - proj).reshape(samples, -1).max(axis=1)
        checks.append(_check("II_orbit_block", r, tol))
        if m.dim:
            r = model.norm(g_ext.second_fundamental_form[:, :dh, dh:]).reshape(samples, -1).max(axis=1)
            checks.append(_check("II_mixed_block", r, tol))
        else:
            checks.append(CheckResult("II_mixed_block", 0.0, tol, info={"vacuous": True}))
    r = model.norm(g_ext.mean_curvature - g_sec.mean_curvature)
    checks.append(_check("mean_curvature_equivariance", r, tol))
    if minimal is None:
        minimal = m.provenance.get("family") in ("point", "geodesic")
    if minimal:
        r = model.norm(g_ext.mean_curvature)
        checks.append(_check("extension_minimal", r, tol))
    if preserved is None:
        fam = m.provenance.get("family")
        preserved = fam in ("point", "geodesic") or (fam in ("geodesic_sphere", "horosphere") and len(hs.pd.phi.indices) == 1)
    if preserved:
        few = min(samples, 6)
        outer = 1e-2
        wide = outer + 2 * step
        u2 = m.sample(rng, few, wide) if m.dim else np.zeros((few, 0))
        y2 = rng.uniform(-half_width + wide, half_width - wide, size=(few, dh))
        if m.dim:
            checks.append(_check("input_parallel_mean_curvature", parallel_mean_curvature_residual(m, u2, step, outer), nested_tol))
        r = parallel_mean_curvature_residual(ext, np.concatenate([y2, u2], axis=1), step, outer)
        checks.append(_check("parallel_mean_curvature_preserved", r, nested_tol))
        if m.dim:
            gm_sec = normal_within(model, gm, sec_on, m.codim_in_host)
            checks.append(_check("input_flat_normal_bundle", normal_curvature_residual(model, gm_sec), tol))
        checks.append(_check("flat_normal_bundle_preserved", normal_curvature_residual(model, g_ext), tol))
    return checks


def _slice_geometry(geo: LocalGeometry, sl: slice) -> LocalGeometry:
    return LocalGeometry(*(getattr(geo, f)[sl] for f in LocalGeometry.__dataclass_fields__))


# ---- S_w families ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SwFamily:
    model: SolvableModel
    alpha: Root
    w: Subspace  # a + n coordinates, inside g_alpha
    subalg: Subspace
    normal: Subspace  # g_alpha minus w
    orbit: SampledSubmanifold
    tubes: dict  # radius -> SampledSubmanifold
    host: Subspace

    @property
    def codim(self) -> int:
        return self.normal.dim


def root_space(model: SolvableModel, alpha: Root) -> Subspace:
    sl = model.block_slice(alpha)
    eye = exact.qeye(model.dim)
    return Subspace.span(list(eye[sl]), model.dim)


def build_Sw_family(
    model: SolvableModel,
    alpha: Root,
    w_basis: Sequence,
    radii: Sequence[float] = (0.4, 0.8, 1.2),
    hs: Horospherical | None = None,
    half_width: float = 0.5,
) -> SwFamily:
    """Orbit of the subgroup with algebra a + (sum of g_lambda, lambda != alpha) + w and its tubes.

    Without ``hs`` the ambient is the whole model; with ``hs`` the construction
    runs inside the section subgroup (its a-part and positive root spaces).
    """
    alpha = tuple(exact.q(x) for x in alpha)
    rd = model.rd
    if hs is None:
        a_part = Subspace.span(list(exact.qeye(model.dim)[: rd.rank]), model.dim)
        roots = list(rd.positive_roots)
        host = Subspace.full(model.dim)
    else:
        a_part = model.subspace(hs.pd.a_sup)
        roots = list(hs.pd.sigma_phi_plus)
        host = hs.section
    if alpha not in roots:
        raise ValueError(f"{alpha} is not a positive root of the ambient")
    galpha = root_space(model, alpha)
    w = Subspace.span([exact.qarray(v) for v in w_basis], model.dim)
    if not galpha.contains_space(w):
        raise ValueError("w is not inside g_alpha")
    if w.dim >= galpha.dim:
        raise ValueError("orbit is the whole space (w must be a proper subspace of g_alpha)")
    parts = [a_part, w] + [root_space(model, lam) for lam in roots if lam != alpha]
    subalg = Subspace.span([v for s in parts for v in s.basis], model.dim)
    for i in range(subalg.dim):
        for j in range(i + 1, subalg.dim):
            if not subalg.contains(model.bracket(subalg.basis[i], subalg.basis[j])):
                raise ValueError("S_w algebra is not closed under the bracket")
    normal = w.orthocomplement(model.metric, within=galpha)
    orbit = subgroup_orbit(model, subalg, half_width, name="Sw_orbit")
    orbit = SampledSubmanifold(orbit.model, orbit.chart, orbit.dim, orbit.domain, {"family": "Sw_orbit", "w_dim": w.dim}, host)
    tubes = {float(r): _tube(model, subalg, normal, float(r), half_width, host, w.dim) for r in radii}
    return SwFamily(model, alpha, w, subalg, normal, orbit, tubes, host)


def _tube(model, subalg, normal, radius, half_width, host, w_dim) -> SampledSubmanifold:
    s_on = model.orthonormal_basis(subalg)
    n_on = model.orthonormal_basis(normal)
    ds, k = len(s_on), len(n_on)
    if k == 1:
        lo_a, hi_a, per_a = np.zeros(0), np.zeros(0), ()
    else:
        lo_a, hi_a, per_a = _sphere_domain(k)

    def directions(u):
        return (hyperspherical(u[:, ds:], k) if k > 1 else np.ones((len(u), 1))) @ n_on

    def chart(u):
        pts, _ = symmetric_geodesic(model, directions(u), np.full(len(u), radius))
        return group_exp(model, u[:, :ds] @ s_on) @ pts

    def radial(u):
        return symmetric_geodesic(model, directions(u), np.full(len(u), radius))[1]

    return SampledSubmanifold(
        model,
        chart,
        ds + k - 1,
        (np.concatenate([np.full(ds, -half_width), lo_a]), np.concatenate([np.full(ds, half_width), hi_a])),
        {"family": "tube", "core": "Sw_orbit", "w_dim": w_dim, "radius": radius},
        host,
        radial,
        (False,) * ds + tuple(per_a),
    )


def extend_family(fam: SwFamily, hs: Horospherical, half_width: float = 0.5) -> SwFamily:
    """Canonical extension of an S_w family built inside the section subgroup."""
    ext_tubes = {r: canonical_extend(t, hs, half_width) for r, t in fam.tubes.items()}
    ext_orbit = canonical_extend(fam.orbit, hs, half_width)
    return SwFamily(fam.model, fam.alpha, fam.w, fam.subalg + hs.ideal, fam.normal, ext_orbit, ext_tubes, Subspace.full(fam.model.dim))


def ad_centre_on_root_space(model: SolvableModel, alpha: Root) -> np.ndarray | None:
    """Exact matrix of ad(z) on g_alpha (block coordinates) for z spanning the centre of k_0."""
    rd, g = model.rd, model.rd.g
    centre = centralizer_in(g, list(rd.k0.basis), rd.k0)
    if centre.dim != 1:
        return None
    z = centre.basis[0]
    sl = model.block_slice(alpha)
    ga = root_space(model, alpha)
    A = exact.qzeros((ga.dim, ga.dim))
    for j, e in enumerate(ga.basis):
        img = model.to_an(g_bracket(g, z, model.to_g(e)))
        if not ga.contains(img):
            return None
        A[:, j] = img[sl]
    return A


def complex_structure(model: SolvableModel, alpha: Root) -> np.ndarray | None:
    """J on g_alpha (float, block coordinates): ad(z) rescaled so that J^2 = -1, if possible."""
    A = ad_centre_on_root_space(model, alpha)
    if A is None:
        return None
    sq = exact.qmatmul(A, A)
    lam = -sq[0, 0]
    if lam <= 0 or not exact.is_zero(sq + lam * exact.qeye(len(A))):
        return None
    return exact.to_float(A) / math.sqrt(lam)


def kahler_angles(model: SolvableModel, alpha: Root, s: Subspace) -> list[float] | None:
    """Kahler angles (radians) of a subspace of g_alpha, from the singular values of <J xi_a, xi_b>."""
    J = complex_structure(model, alpha)
    if J is None:
        return None
    sl = model.block_slice(alpha)
    on = model.orthonormal_basis(s)
    if len(on) < 2:
        return [math.pi / 2] * len(on)
    blk = on[:, sl]
    G = model.float_metric[sl, sl]
    mat = blk @ G @ (J @ blk.T)
    sv = np.linalg.svd(mat, compute_uv=False)
    return sorted(float(math.acos(min(1.0, x))) for x in sv)


def isoparametric_check(
    fam: SwFamily | dict,
    *,
    samples: int = 50,
    seed: int = 0,
    step: float = 1e-3,
    tol: float = 1e-3,
) -> list[CheckResult]:
    """CMC spread of each tube, normal orientation, and consistency of two mean-curvature routes."""
    tubes = fam.tubes if isinstance(fam, SwFamily) else fam
    checks = []
    rng = np.random.default_rng(seed)
    for r, tube in sorted(tubes.items()):
        if tube.codim != 1:
            raise ValueError(f"tube at radius {r} has codimension {tube.codim}, expected a hypersurface")
        nodes = tube.sample(rng, samples, 2 * step)
        geo = local_geometry(tube, nodes, step)
        rad = radial_geometry(tube, nodes, step)
        model = tube.model
        nvec = geo.normal[:, 0]
        dots = model.inner(nvec, rad["normal"])
        if np.any(np.abs(dots) < 0.9):
            raise OrientationError(f"normal orientation inconsistent at radius {r}: |<N, radial>| = {np.abs(dots).min():.3f}")
        sign = np.sign(dots)
        H = model.inner(geo.mean_curvature, rad["normal"])
        spread = float(H.max() - H.min())
        checks.append(CheckResult(f"cmc_spread[r={r:g}]", spread, tol, int(np.argmax(np.abs(H - np.median(H)))), info={"mean_curvature": float(np.median(H))}))
        checks.append(CheckResult(f"normal_orientation[r={r:g}]", float(np.max(1 - np.abs(dots))), tol, info={"svd_sign_flips": int(np.sum(sign < 0))}))
        Hr = rad["mean_curvature"]
        checks.append(_check(f"shape_operator_route[r={r:g}]", np.abs(H - Hr), tol))
        checks.append(_check(f"normal_parallel[r={r:g}]", rad["normal_parallel"], tol))
    return checks


# ---- parallel families -------------------------------------------------


def parallel_family_extend(
    leaves: Sequence[SampledSubmanifold],
    hs: Horospherical,
    *,
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-3,
    half_width: float = 0.5,
    geodesic_step: float = 1e-3,
) -> tuple[list[SampledSubmanifold], list[CheckResult]]:
    """Extend concentric spheres and check that normal geodesics carry leaf to leaf.

    From a node of the extended leaf at radius r_i the integrated normal
    geodesic of length r_{i+1} - r_i must land on the extended leaf at radius
    r_{i+1}: its section factor is at distance r_{i+1} from the centre.
    """
    ext = [canonical_extend(l, hs, half_width) for l in leaves]
    checks = []
    rng = np.random.default_rng(seed)
    model = hs.model
    for i in range(len(leaves) - 1):
        a, b = leaves[i], leaves[i + 1]
        ra, rb = a.provenance.get("radius"), b.provenance.get("radius")
        if ra is None or rb is None or a.radial is None:
            raise ValueError("parallel leaves must be geodesic spheres with radii")
        if a.provenance.get("offset") != b.provenance.get("offset"):
            raise ValueError("leaves are not concentric")
        nodes = ext[i].sample(rng, samples)
        start = ext[i].points(nodes)
        normal = ext[i].radial(nodes)
        end = geodesic(model, start, normal, rb - ra, geodesic_step).points
        h, s = horospherical_factorize(hs, end)
        _, centre = _basepoint(model, model.orthonormal_basis(a.host), a.provenance["offset"])
        dist = symmetric_distance(model, np.broadcast_to(centre, s.shape), s)
        checks.append(_check(f"equidistance[{ra:g}->{rb:g}]", np.abs(dist - rb), tol))
    return ext, checks


def kahler_generic_w(model: SolvableModel, alpha: Root) -> list[np.ndarray]:
    """A rational 2-plane span{u, Ju' + v} in g_alpha whose complement has Kahler angle strictly inside (0, pi/2).

    J is replaced by the exact operator ad(z) from the centre of k_0, which is a
    positive multiple of J, so w stays rational.
    """
    A = ad_centre_on_root_space(model, alpha)
    ga = root_space(model, alpha)
    if A is None or ga.dim < 4:
        raise ValueError("needs a complex root space of complex dimension >= 2")
    sl = model.block_slice(alpha)
    G = model.metric[sl, sl]
    u = exact.qeye(ga.dim)[0]
    ju = A @ u
    plane = [u, ju]
    v = None
    for e in exact.qeye(ga.dim):
        cand = np.array(e, dtype=object)
        for b in plane:
            cand = cand - (cand @ G @ b) / (b @ G @ b) * b
        if not exact.is_zero(cand):
            v = cand
            break
    def lift(x):
        out = exact.qzeros(model.dim)
        out[sl] = x
        return out
    return [lift(u), lift(ju + v)]
