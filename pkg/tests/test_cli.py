import json

import pytest

from g2cal import cli


def run(argv):
    return cli.main(argv)


def test_algebra_check_passes(tmp_path):
    out = tmp_path / "r.json"
    assert run(["algebra-check", "--samples", "300", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert all("provenance" in c for c in report["checks"])


def test_reports_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["algebra-check", "--samples", "200", "--seed", "3", "--out", str(a)])
    run(["algebra-check", "--samples", "200", "--seed", "3", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_mesh_and_dirac_pipeline(tmp_path):
    mesh = tmp_path / "ball.json"
    assert run(["mesh", "--kind", "ball", "--refine", "2", "--out", str(mesh)]) == 0
    assert run(["simons", "--mesh", str(mesh)]) == 0
    assert run(["dirac", "--mesh", str(mesh), "--task", "linearize"]) == 0
    assert run(
        ["dirac", "--mesh", str(mesh), "--bc", "nu_x", "--task", "kernel"]
    ) == 0


def test_torus_spectrum_csv(tmp_path):
    mesh = tmp_path / "t.json"
    csv = tmp_path / "spec.csv"
    run(["mesh", "--kind", "torus", "--n", "4", "--out", str(mesh)])
    assert run(
        ["dirac", "--mesh", str(mesh), "--task", "spectrum", "--csv", str(csv)]
    ) == 0
    lines = csv.read_text().strip().splitlines()
    assert len(lines) == 4 * 4**3
    float(lines[0])


def test_boundary_tasks(tmp_path):
    mesh = tmp_path / "ball.json"
    run(["mesh", "--kind", "ball", "--refine", "2", "--out", str(mesh)])
    for task in ("chern", "index", "rigidity"):
        assert run(["boundary", "--mesh", str(mesh), "--task", task]) == 0


def test_cy_fixture_tasks():
    assert run(["cy", "--fixture", "torus", "--n", "4", "--task", "dvee-check"]) == 0
    assert run(["cy", "--fixture", "sphere3", "--refine", "1", "--task", "kernel"]) == 0


def test_certify_cy():
    assert run(["certify-cy"]) == 0


def test_missing_mesh_is_usage_error(tmp_path):
    assert run(["simons", "--mesh", str(tmp_path / "nope.json")]) == 2


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2
