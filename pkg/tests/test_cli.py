import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from invflow.cli import main
from invflow.fixtures import tetrahedron
from invflow.flow import newton_refine
from invflow.problem import load_problem, problem_document

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def write(tmp_path, doc, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


TET = {
    "vertex_count": 4,
    "faces": [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]],
    "inversive": 1.0,
    "radii": [1.5, 0.8, 1.1, 0.9],
}


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", write(tmp_path, TET), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "validation.json").read_text())
    assert rep["valid"] and rep["euler_characteristic"] == 2


def test_validate_negative_weight(tmp_path, capsys):
    doc = dict(TET, inversive={"default": 1.0, "edges": [[3, 2, -0.5]]})
    assert main(["validate", write(tmp_path, doc), "--json"]) == 1
    out = capsys.readouterr().out
    assert "(2, 3)" in out and "-0.5" in out


def test_validate_open_shell(tmp_path, capsys):
    doc = dict(TET, faces=[[1, 2, 3], [1, 2, 4], [1, 3, 4]])
    assert main(["validate", write(tmp_path, doc), "--json"]) == 1
    rep = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert rep["error"] == "NonManifoldEdge" and rep["edge"] == [2, 3]


def test_unreadable_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad)]) == 2
    assert main(["flow", str(tmp_path / "missing.json")]) == 2


def test_unknown_edge_rejected(tmp_path):
    s = {"fixture": "octahedron", "inversive": {"default": 1.0, "edges": [[1, 6, 2.0]]}}
    assert main(["flow", write(tmp_path, s)]) == 2


def test_flow_tetrahedron(tmp_path):
    out = tmp_path / "run"
    assert main(["flow", write(tmp_path, TET), "--out", str(out), "--svg"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "Converged"
    np.testing.assert_allclose(rep["final_curvature"], math.pi, atol=1e-10)
    assert abs(np.prod(rep["final_radii"]) - 1) <= 1e-12
    assert rep["rate"]["r_squared"] > 0.99
    assert "wall_time_s" not in rep
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,residual,in_omega,potential,u_1,u_2,u_3,u_4,K_1,K_2,K_3,K_4"
    t = np.array([float(x.split(",")[0]) for x in lines[1:]])
    assert np.all(np.diff(t) > 0)
    assert (out / "residual.svg").read_text().startswith("<svg")


def test_flow_torus_explicit_zero(tmp_path):
    doc = {"fixture": "torus7", "inversive": 0.5, "radii": "random", "target": [0] * 7}
    assert main(["prescribe", write(tmp_path, doc), "--seed", "4"]) == 0


def test_prescribe_needs_target(tmp_path):
    assert main(["prescribe", write(tmp_path, TET)]) == 2


def test_bad_target_sum_rejected(tmp_path):
    assert main(["flow", write(tmp_path, dict(TET, target=[1, 1, 1, 1]))]) == 2


def test_not_converged_exit_code(tmp_path):
    assert main(["flow", write(tmp_path, TET), "--t-max", "0.5"]) == 1


def test_flags_override_solver_block(tmp_path):
    doc = dict(TET, solver={"t_max": 0.5})
    assert main(["flow", write(tmp_path, doc)]) == 1
    assert main(["flow", write(tmp_path, doc), "--t-max", "50"]) == 0


def test_admissible(tmp_path, capsys):
    assert main(["admissible", write(tmp_path, {"fixture": "tetrahedron", "inversive": 1.0})]) == 0
    assert "NecessaryConditionsHold" in capsys.readouterr().out
    x = [0.1, 0.1, 0.1, 4 * math.pi - 0.3]
    doc = {"fixture": "tetrahedron", "inversive": 1.0, "target": x}
    assert main(["admissible", write(tmp_path, doc), "--out", str(tmp_path / "a")]) == 1
    rep = json.loads((tmp_path / "a" / "admissibility.json").read_text())
    assert rep["verdict"] == "violated" and [1, 2, 3] in rep["violated"]


def test_admissible_budget(tmp_path, capsys):
    doc = {"fixture": "torus9", "inversive": 0.5, "target": [0] * 9}
    assert main(["admissible", write(tmp_path, doc), "--max-subsets", "8"]) == 2
    assert "--max-subsets" in capsys.readouterr().err
    assert main(["admissible", write(tmp_path, doc)]) == 0


def test_triangle(tmp_path, capsys):
    third = math.pi / 3
    assert main(["triangle", "--I", "1", "1", "1", "--target", str(third), str(third), str(third), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out.split("\n", 2)[2])
    np.testing.assert_allclose(rep["radii"], 1.0, atol=1e-12)
    assert main(["triangle", "--I", "3", "0", "0", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert rep["angle_upper_bounds"][0] == math.pi
    assert main(["triangle", "--I", "0", "0", "0", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    np.testing.assert_allclose(rep["angle_upper_bounds"], math.pi / 2)
    assert main(["triangle", "--I", "0", "0", "0", "--target", "1.6", "0.8", str(math.pi - 2.4)]) == 2


def test_triangle_sweep(tmp_path):
    assert main(["triangle", "--I", "3", "2", "0", "--sweep", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "triangle.json").read_text())
    last = [row for row in rep["sweep"] if row["radius"] == 1e-8]
    for row in last:
        assert row["angle"] == pytest.approx(row["bound"], abs=1e-3)


def test_round_trip_radii(tmp_path):
    out = tmp_path / "r1"
    assert main(["flow", write(tmp_path, TET), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    p = load_problem(write(tmp_path, TET))
    again = write(tmp_path, problem_document(p, radii=rep["final_radii"]), "again.json")
    reloaded = load_problem(again)
    res = newton_refine(reloaded.surface, reloaded.weights, np.log(reloaded.radii), np.full(4, math.pi))
    assert res.iterations <= 2 and res.residual <= 1e-12


def test_byte_identical_outputs(tmp_path):
    src = PROBLEMS / "torus_separated.json"
    for name in ("a", "b"):
        assert main(["prescribe", str(src), "--seed", "11", "--out", str(tmp_path / name), "--svg"]) == 0
    for f in ("report.json", "trajectory.csv", "residual.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.parametrize("name", sorted(p.name for p in PROBLEMS.glob("*.json")))
def test_shipped_problems_validate(name):
    assert main(["validate", str(PROBLEMS / name)]) == 0


@pytest.mark.skipif(shutil.which("invflow") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(
        ["invflow", "flow", str(PROBLEMS / "tetrahedron.json")], capture_output=True, text=True
    )
    assert out.returncode == 0 and out.stdout.startswith("Converged")


def test_module_entry(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "invflow.cli", "triangle", "--I", "0", "0", "0"], capture_output=True, text=True
    )
    assert out.returncode == 0 and "Z bounds" in out.stdout


def test_problem_document_round_trip():
    from invflow.problem import parse_problem

    p = parse_problem({"fixture": "tetrahedron", "inversive": {"default": 0.5, "edges": [[2, 3, 3.0]]}})
    q = parse_problem(problem_document(p))
    np.testing.assert_array_equal(p.weights.values, q.weights.values)
    assert q.surface.faces == tetrahedron().faces
