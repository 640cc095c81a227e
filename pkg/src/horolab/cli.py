"""Command-line entry point: ``horolab <command> [options]``.

Exit codes: 0 all checks pass, 1 some check failed (or golden mismatch),
2 configuration error (details as JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import exact, extendlab, liealg, parabolic, report, rootspace, solvgeom
from .report import CheckResult, exact_check

FAMILIES_T1 = ("point", "geodesic", "geodesic_sphere", "horosphere")


class ConfigError(ValueError):
    pass


# ---- shared construction ------------------------------------------------


def _h_reg(text):
    if text is None:
        return None
    try:
        return [exact.q(t) for t in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"--h-reg must be comma-separated rationals, got {text!r}") from exc


def _setup(args):
    g = liealg.build_from_catalog(args.algebra)
    h = _h_reg(getattr(args, "h_reg", None))
    rd = rootspace.root_decompose(g, h_reg=h)
    return g, rd


def _phi(rd, text):
    phi = parabolic.PhiSubset.parse(text)
    try:
        phi.validate(rd.rank)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return phi


def _tolerances(args) -> dict:
    tol = dict(report.TOLERANCE_LADDER)
    blanket = getattr(args, "tol", None)
    if blanket is not None:
        if not blanket > 0:
            raise ConfigError("--tol must be positive")
        tol = {k: blanket for k in tol}
    for key in tol:
        val = getattr(args, f"tol_{key}", None)
        if val is not None:
            if not val > 0:
                raise ConfigError(f"--tol-{key} must be positive")
            tol[key] = val
    return tol


def _config(args, **extra) -> dict:
    cfg = {
        "algebra": getattr(args, "algebra", None),
        "phi": getattr(args, "phi", None),
        "h_reg": getattr(args, "h_reg", None),
        "seed": getattr(args, "seed", None),
        "samples": getattr(args, "samples", None),
        "steps": {"fd": args.fd_step} if getattr(args, "fd_step", None) is not None else None,
        "tolerances": {"exact": 0, **_tolerances(args)},
    }
    cfg.update(extra)
    return {k: v for k, v in cfg.items() if v is not None}


# ---- commands -----------------------------------------------------------


def cmd_catalog(args) -> tuple[dict, int]:
    rows = []
    for name in liealg.catalog_names():
        if args.filter and args.filter not in name:
            continue
        g = liealg.build_from_catalog(name)
        rd = rootspace.root_decompose(g)
        cls = rootspace.classify_root_system(rd)
        rows.append({"name": name, "dim": g.dim, "rank": rd.rank, "type": cls["label"], "matrix_size": g.matrix_size})
    return report.build_report("catalog", {"filter": args.filter or ""}, [], {"algebras": rows}), 0


def cmd_roots(args) -> tuple[dict, int]:
    g, rd = _setup(args)
    return report.build_report("roots", {"algebra": args.algebra, "h_reg": [exact.fmt(x) for x in rd.h_reg]}, [], rootspace.roots_table(rd)), 0


def cmd_parabolic(args) -> tuple[dict, int]:
    g, rd = _setup(args)
    phi = _phi(rd, args.phi)
    pd = parabolic.build_parabolic(rd, phi)
    checks = [exact_check(k, v) for k, v in parabolic.check_parabolic(pd).items()]
    data = parabolic.parabolic_report(pd)
    data.pop("checks", None)
    if phi.indices:
        bc = parabolic.boundary_component_algebra(pd)
        data["boundary_component"] = {
            "dim": bc.algebra.dim,
            "rank": bc.rank,
            "type": rootspace.classify_root_system(bc.roots)["label"],
            "multiplicities": [[exact.fmt_array(r.coords), r.multiplicity] for r in bc.roots.roots],
        }
    return report.build_report("parabolic", {"algebra": args.algebra, "phi": list(phi.indices)}, checks, data), 0


def suite_structural(args, tol) -> tuple[list[CheckResult], dict]:
    g, rd = _setup(args)
    checks = []
    for k, v in liealg.algebra_checks(g).items():
        ok = bool(v) if isinstance(v, bool) else v == 0
        checks.append(exact_check(f"algebra.{k}", ok))
    for k, v in rootspace.check_decomposition(rd).items():
        checks.append(exact_check(f"roots.{k}", v))
    model = solvgeom.build_model(rd)
    for k, v in solvgeom.model_checks(model).items():
        checks.append(exact_check(f"model.{k}", v))
    subsets = [_phi(rd, args.phi)] if args.phi is not None else parabolic.all_subsets(rd.rank)
    for phi in subsets:
        pd = parabolic.build_parabolic(rd, phi)
        tag = phi.label()
        for k, v in parabolic.check_parabolic(pd).items():
            checks.append(exact_check(f"parabolic{tag}.{k}", v))
        hs = solvgeom.horospherical(model, pd)
        for k, v in solvgeom.horospherical_checks(hs).items():
            checks.append(exact_check(f"horospherical{tag}.{k}", v))
        tg = solvgeom.totally_geodesic_test(model, hs.ideal)
        orth = parabolic.orthogonality_test(rd, phi)
        checks.append(exact_check(f"horospherical{tag}.totally_geodesic_iff_orthogonal", tg == orth, totally_geodesic=tg, orthogonal=orth))
    data = {"dims": rd.dims(), "type": rootspace.classify_root_system(rd)["label"]}
    return checks, data


def suite_orbits(args, tol) -> tuple[list[CheckResult], dict]:
    g, rd = _setup(args)
    phi = _phi(rd, args.phi or "")
    model = solvgeom.build_model(rd)
    pd = parabolic.build_parabolic(rd, phi)
    hs = solvgeom.horospherical(model, pd)
    orbit = solvgeom.orbit_second_fundamental_form(model, hs.ideal)
    checks = [exact_check(f"orbit.{k}", v) for k, v in solvgeom.horospherical_checks(hs).items()]
    tg = orbit.totally_geodesic
    orth = parabolic.orthogonality_test(rd, phi)
    checks.append(exact_check("orbit.totally_geodesic_iff_orthogonal", tg == orth, totally_geodesic=tg, orthogonal=orth))
    checks.append(
        CheckResult("orbit.mean_curvature_exact", exact.max_abs(orbit.mean_curvature), "exact", info={"codim": orbit.codim})
    )
    rng = np.random.default_rng(args.seed)
    mats = solvgeom.group_exp(model, solvgeom.random_an(model, rng, args.samples))
    res = solvgeom.factorization_residuals(hs, mats)
    for k, v in res.items():
        checks.append(CheckResult(f"factorization.{k}", v, tol["factorization"], info={"samples": args.samples}))
    checks.extend(extendlab.orbit_fd_agreement(model, hs.ideal, seed=args.seed, step=args.fd_step, tol=tol["fd"]))
    data = {"ideal_dim": hs.ideal.dim, "section_dim": hs.section.dim, "orthogonal": orth}
    return checks, data


def _t1_family(model, pd, hs, family: str):
    if family == "point":
        return extendlab.point_family(model, hs.section)
    if family == "geodesic":
        return extendlab.geodesic_family(model, hs.section)
    if family == "geodesic_sphere":
        return extendlab.geodesic_sphere_family(model, hs.section, radius=0.8)
    if family == "horosphere":
        return extendlab.horosphere_family(model, model.subspace(pd.a_sup), model.subspace(pd.n_sup))
    raise ConfigError(f"unknown family {family!r} (choose from {', '.join(FAMILIES_T1)} or all)")


def suite_theorem1(args, tol) -> tuple[list[CheckResult], dict]:
    g, rd = _setup(args)
    phi = _phi(rd, args.phi or "")
    if not phi.indices:
        raise ConfigError("theorem1 needs a non-empty --phi (the boundary component must not be a point)")
    model = solvgeom.build_model(rd)
    pd = parabolic.build_parabolic(rd, phi)
    hs = solvgeom.horospherical(model, pd)
    fams = FAMILIES_T1 if args.family in (None, "all") else tuple(args.family.split(","))
    checks = []
    for fam in fams:
        m = _t1_family(model, pd, hs, fam)
        if m.dim > 0 and hs.section.dim < 2 and fam == "geodesic_sphere":
            continue
        res = extendlab.verify_theorem1(m, hs, samples=args.samples, seed=args.seed, step=args.fd_step, tol=tol["fd"], nested_tol=tol["cmc"])
        for c in res:
            c.id = f"{fam}.{c.id}"
        checks.extend(res)
    return checks, {"families": list(fams), "ideal_dim": hs.ideal.dim, "section_dim": hs.section.dim}


def _sw_root(rd, pd, root_index):
    if pd is not None and pd.phi.indices:
        idx = root_index or pd.phi.indices[0]
        if idx not in pd.phi.indices:
            raise ConfigError("--root must be one of the --phi indices when extending")
    else:
        doubled = [i for i, a in enumerate(rd.simple_roots, 1) if tuple(2 * x for x in a) in set(rd.root_set)]
        idx = root_index or (doubled[0] if doubled else 1)
    if not 1 <= idx <= rd.rank:
        raise ConfigError(f"--root {idx} outside 1..{rd.rank}")
    return rd.simple_roots[idx - 1]


def _w_choice(model, alpha, spec: str):
    ga = extendlab.root_space(model, alpha)
    if spec == "kahler":
        return extendlab.kahler_generic_w(model, alpha)
    try:
        k = int(spec)
    except ValueError as exc:
        raise ConfigError(f"--w must be an integer dimension or 'kahler', got {spec!r}") from exc
    if not 0 <= k < ga.dim:
        raise ConfigError(f"--w {k}: need 0 <= dim w < dim g_alpha = {ga.dim}")
    return list(ga.basis[:k])


def suite_isoparametric(args, tol) -> tuple[list[CheckResult], dict]:
    g, rd = _setup(args)
    phi = _phi(rd, args.phi or "")
    model = solvgeom.build_model(rd)
    pd = parabolic.build_parabolic(rd, phi) if phi.indices else None
    hs = solvgeom.horospherical(model, pd) if pd is not None else None
    family = args.family or "Sw"
    radii = [float(r) for r in args.radii.split(",")]
    data: dict = {"family": family, "radii": radii}
    if family == "spheres":
        if hs is None:
            raise ConfigError("the spheres family needs a non-empty --phi")
        leaves = [extendlab.geodesic_sphere_family(model, hs.section, r) for r in radii]
        ext, checks = extendlab.parallel_family_extend(leaves, hs, samples=args.samples, seed=args.seed, tol=tol["cmc"])
        tubes = dict(zip(radii, ext))
        checks.extend(extendlab.isoparametric_check(tubes, samples=args.samples, seed=args.seed, step=args.fd_step, tol=tol["cmc"]))
        return checks, data
    if family != "Sw":
        raise ConfigError(f"unknown isoparametric family {family!r} (Sw or spheres)")
    alpha = _sw_root(rd, pd, args.root)
    w = _w_choice(model, alpha, args.w)
    fam = extendlab.build_Sw_family(model, alpha, w, radii, hs=hs)
    core = solvgeom.orbit_second_fundamental_form(model, fam.subalg)
    checks = [CheckResult("core.mean_curvature_exact", exact.max_abs(core.mean_curvature), "exact", info={"codim": core.codim})]
    if hs is not None:
        fam = extendlab.extend_family(fam, hs)
    checks.extend(extendlab.isoparametric_check(fam, samples=args.samples, seed=args.seed, step=args.fd_step, tol=tol["cmc"]))
    angles = extendlab.kahler_angles(model, alpha, fam.normal)
    data.update({"alpha": exact.fmt_array(alpha), "w_dim": fam.w.dim, "normal_dim": fam.normal.dim, "extended": hs is not None})
    if angles is not None:
        data["kahler_angles_of_normal"] = angles
    return checks, data


SUITES = {
    "structural": suite_structural,
    "orbits": suite_orbits,
    "theorem1": suite_theorem1,
    "isoparametric": suite_isoparametric,
}


def cmd_verify(args) -> tuple[dict, int]:
    tol = _tolerances(args)
    suite = args.suite
    if suite in ("theorem1", "isoparametric") and args.samples is None:
        args.samples = 20 if suite == "theorem1" else 50
    if args.samples is None:
        args.samples = 100
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    if not 0 < args.fd_step < 0.1:
        raise ConfigError("--fd-step must lie in (0, 0.1)")
    checks, data = SUITES[suite](args, tol)
    extra = {"suite": suite}
    if suite in ("theorem1", "isoparametric"):
        extra["family"] = args.family or ("all" if suite == "theorem1" else "Sw")
    if suite == "isoparametric":
        extra.update({"w": args.w, "radii": args.radii, "root": args.root or 0})
    rep = report.build_report(f"verify {suite}", _config(args, **extra), checks, data)
    return rep, 0 if rep["status"] == "pass" else 1


def cmd_extend(args) -> tuple[dict, int]:
    args.suite = args.verify
    if not args.phi:
        raise ConfigError("extend needs a non-empty --phi")
    return cmd_verify(args)


# ---- argument parsing ---------------------------------------------------


def _add_common(p: argparse.ArgumentParser, suite: bool = True) -> None:
    p.add_argument("--algebra", required=True, help="catalog name, e.g. sl3r, su32, so(3,2), sl2r+sl2r")
    p.add_argument("--phi", default=None, help="comma-separated 1-based simple-root indices ('' or none for the empty set)")
    p.add_argument("--h-reg", default=None, help="regular element of a as comma-separated rationals (default: catalog choice)")
    if not suite:
        return
    p.add_argument("--family", default=None, help="point, geodesic, geodesic_sphere, horosphere, all (theorem1); Sw or spheres (isoparametric)")
    p.add_argument("--samples", type=int, default=None, help="sample count (default 100 orbits, 20 theorem1, 50 isoparametric)")
    p.add_argument("--fd-step", type=float, default=1e-3, help="finite-difference step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w", default="1", help="dim w for the S_w family, or 'kahler'")
    p.add_argument("--root", type=int, default=None, help="1-based simple root alpha for the S_w family")
    p.add_argument("--radii", default="0.4,0.8,1.2", help="comma-separated tube radii")
    p.add_argument("--tol", type=float, default=None, help="blanket tolerance for every non-exact check")
    for key, val in report.TOLERANCE_LADDER.items():
        p.add_argument(f"--tol-{key}", type=float, default=None, help=f"override tolerance (default {val:g})")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="write the report to this path instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--golden", default=None, help="compare the JSON report byte-for-byte with this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horolab", description="Restricted roots, parabolic subalgebras and horospherical geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list catalog algebras")
    p.add_argument("--filter", default="", help="substring filter on names")
    _add_output(p)

    p = sub.add_parser("roots", help="restricted root data")
    _add_common(p, suite=False)
    _add_output(p)

    p = sub.add_parser("parabolic", help="parabolic subalgebra and boundary component")
    _add_common(p, suite=False)
    _add_output(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    _add_common(p)
    _add_output(p)

    p = sub.add_parser("extend", help="canonically extend a family and verify it")
    _add_common(p)
    p.add_argument("--verify", choices=("theorem1", "isoparametric"), default="theorem1")
    _add_output(p)
    return parser


COMMANDS = {"catalog": cmd_catalog, "roots": cmd_roots, "parabolic": cmd_parabolic, "verify": cmd_verify, "extend": cmd_extend}


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"schema": report.SCHEMA, "error": kind, "message": message}, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        rep, code = COMMANDS[args.command](args)
    except (ConfigError, liealg.CatalogError, rootspace.RegularityError, ValueError) as exc:
        _error(type(exc).__name__, str(exc))
        return 2
    text = report.dumps(rep) if args.format == "json" else report.to_text(rep)
    if args.golden:
        golden = Path(args.golden).read_text()
        if golden != report.dumps(rep):
            _error("GoldenMismatch", f"report differs from {args.golden}")
            code = 1
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
