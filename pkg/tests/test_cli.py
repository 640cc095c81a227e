import json

import pytest

from horolab import cli, report


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_lists_algebras(capsys):
    code, out, _ = run(capsys, "catalog")
    rows = {r["name"]: r for r in json.loads(out)["data"]["algebras"]}
    assert code == 0
    assert rows["sl3r"]["rank"] == 2
    assert rows["su32"]["type"] == "BC2"
    code, out, _ = run(capsys, "catalog", "--filter", "su")
    assert {r["name"] for r in json.loads(out)["data"]["algebras"]} == {"su21", "su31", "su32"}


def test_roots_table(capsys):
    code, out, _ = run(capsys, "roots", "--algebra", "su21")
    data = json.loads(out)["data"]
    assert code == 0 and data["type"] == "BC1" and data["rank"] == 1
    assert set(data["dims"]) == {"g", "g0", "k0", "a", "n"}
    assert sorted(r["mult"] for r in data["roots"] if r["positive"]) == [1, 2]


def test_parabolic_report(capsys):
    code, out, _ = run(capsys, "parabolic", "--algebra", "su32", "--phi", "2")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert rep["data"]["boundary_component"]["type"] == "BC1"


def test_verify_structural_exit_zero(capsys):
    code, out, _ = run(capsys, "verify", "structural", "--algebra", "sl3r")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert all(c["tolerance"] == "exact" for c in rep["checks"])


def test_verify_orbits_minimal(capsys):
    code, out, _ = run(capsys, "verify", "orbits", "--algebra", "sl3r", "--phi", "1")
    rep = json.loads(out)
    h = next(c for c in rep["checks"] if c["id"] == "orbit.mean_curvature_exact")
    assert code == 0 and h["worst_residual"] == "0"


def test_verify_theorem1_geodesic_su21(capsys):
    code, out, _ = run(capsys, "verify", "theorem1", "--algebra", "su21", "--phi", "1", "--family", "geodesic")
    rep = json.loads(out)
    assert code == 0
    ii = [c for c in rep["checks"] if ".II_" in c["id"]]
    assert ii and all(float(c["worst_residual"]) < 1e-4 for c in ii)


def test_failing_check_exits_one(capsys):
    # an absurdly tight fd tolerance must fail honestly
    code, out, _ = run(capsys, "verify", "theorem1", "--algebra", "sl3r", "--phi", "1", "--family", "geodesic_sphere", "--samples", "3", "--tol-fd", "1e-30")
    assert code == 1 and json.loads(out)["status"] == "fail"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "orbits", "--algebra", "nope"],
        ["verify", "orbits", "--algebra", "sl3r", "--phi", "5"],
        ["verify", "theorem1", "--algebra", "sl3r", "--phi", ""],
        ["verify", "orbits", "--algebra", "sl3r", "--tol-fd", "-1"],
        ["verify", "isoparametric", "--algebra", "su21", "--w", "7"],
        ["verify", "bogus", "--algebra", "sl3r"],
    ],
)
def test_config_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    if argv[1] != "bogus":
        payload = json.loads(err.strip().splitlines()[-1])
        assert payload["schema"] == report.SCHEMA and payload["error"]


def test_report_embeds_resolved_config(capsys):
    code, out, _ = run(capsys, "verify", "orbits", "--algebra", "sl2r+sl2r", "--phi", "1", "--samples", "10", "--tol", "1e-7")
    cfg = json.loads(out)["config"]
    assert cfg["samples"] == 10 and cfg["seed"] == 0 and cfg["steps"] == {"fd": 0.001}
    assert set(cfg["tolerances"]) == {"exact", *report.TOLERANCE_LADDER}
    assert cfg["tolerances"]["fd"] == 1e-7


def test_deterministic_and_golden(capsys, tmp_path):
    argv = ["verify", "isoparametric", "--algebra", "su21", "--w", "1", "--samples", "5", "--radii", "0.5,1.0"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    golden = tmp_path / "golden.json"
    out = tmp_path / "out.json"
    code, _, _ = run(capsys, *argv, "--out", str(golden))
    assert code == 0 and golden.read_text() == first
    assert run(capsys, *argv, "--golden", str(golden), "--out", str(out))[0] == 0
    golden.write_text(first.replace("su21", "su22"))
    code, _, err = run(capsys, *argv, "--golden", str(golden), "--out", str(out))
    assert code == 1 and "GoldenMismatch" in err


def test_text_format(capsys):
    code, out, _ = run(capsys, "verify", "orbits", "--algebra", "sl2r", "--phi", "", "--format", "text", "--samples", "5")
    assert code == 0 and out.startswith("verify orbits: PASS")


def test_extend_isoparametric_su32(capsys):
    code, out, _ = run(capsys, "extend", "--algebra", "su32", "--phi", "2", "--verify", "isoparametric", "--w", "1", "--samples", "5", "--radii", "0.6")
    rep = json.loads(out)
    assert code == 0 and rep["data"]["extended"]


def test_h_reg_override(capsys):
    code, out, _ = run(capsys, "roots", "--algebra", "sl3r", "--h-reg", "1,-3")
    rep = json.loads(out)
    assert code == 0 and rep["config"]["h_reg"] == ["1", "-3"]
    assert rep["data"]["type"] == "A2"
    # 2x - y vanishes on (1, 2): not regular
    code, _, err = run(capsys, "roots", "--algebra", "sl3r", "--h-reg", "1,2")
    assert code == 2 and "error" in json.loads(err)
