import json
import subprocess
import sys

import pytest

from renew import cli
from renew.schemas import validate_csv

FAST = ["--samples", "30", "--padding-samples", "60"]


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main(args + ["--out", str(out)])
    return code, out


def test_plan_writes_metrics_result_and_svg(tmp_path):
    code, out = run(["plan", "--env", "strait", "--k", "2"] + FAST, tmp_path)
    assert code == 0
    name, rows = validate_csv(out / "metrics.csv")
    assert name == "metrics" and rows[0]["planner"] == "renew" and rows[0]["status"] == "ok"
    doc = json.loads((out / "result.json").read_text())
    assert doc["waypoints"] and doc["metrics"]["fuel"] > 0
    assert (out / "plan.svg").read_text().startswith("<?xml")


def test_plan_k_list_writes_one_row_per_budget(tmp_path):
    code, out = run(["plan", "--env", "strait", "--k", "1,2", "--no-svg"] + FAST, tmp_path)
    assert code == 0
    _, rows = validate_csv(out / "metrics.csv")
    assert [r["k"] for r in rows] == ["1", "2"]
    # the only k=1 channel runs through the strait, which padding closes
    assert [r["status"] for r in rows] == ["infeasible", "ok"]
    assert not (out / "result_k1.json").exists() and (out / "result_k2.json").exists()
    assert not list(out.glob("*.svg"))


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"env": "strait", "k": "2", "samples": 30, "padding-samples": 60, "svg": False}))
    code, out = run(["plan", "--config", str(cfg)], tmp_path, "a")
    assert code == 0
    assert validate_csv(out / "metrics.csv")[1][0]["k"] == "2"
    code, out = run(["plan", "--config", str(cfg), "--k", "3"], tmp_path, "b")
    assert code == 0
    assert validate_csv(out / "metrics.csv")[1][0]["k"] == "3"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert cli.main(["plan", "--config", str(bad), "--out", str(tmp_path / "c")]) == 2


def test_compare_rows(tmp_path):
    code, out = run(["compare", "--env", "ablation", "--k", "2", "--resolution", "4", "--no-svg"] + FAST, tmp_path)
    assert code == 0
    _, rows = validate_csv(out / "compare.csv")
    assert [r["planner"] for r in rows] == ["renew", "grid-astar-o", "grid-astar-s"]
    assert all(r["status"] == "ok" for r in rows)


def test_padding_report_and_mesh_dump(tmp_path):
    code, out = run(["padding-report", "--env", "strait", "--k", "2", "--padding-samples", "60"], tmp_path)
    assert code == 0
    assert validate_csv(out / "padding.csv")[0] == "padding"
    _, chans = validate_csv(out / "channels.csv")
    assert len(chans) == 2 and (out / "padding.svg").exists()
    code, out = run(["mesh-dump", "--env", "strait"], tmp_path, "mesh")
    assert code == 0
    for f, schema in (("mesh_vertices.csv", "mesh_vertices"), ("mesh_triangles.csv", "mesh_triangles"),
                      ("mesh_edges.csv", "mesh_edges")):
        assert validate_csv(out / f)[0] == schema


def test_contingency_from_result_file(tmp_path):
    code, out = run(["plan", "--env", "strait", "--k", "2", "--no-svg"] + FAST, tmp_path, "p")
    assert code == 0
    code, out2 = run(["contingency", "--env", "strait", "--result", str(out / "result.json"),
                      "--spacing", "4", "--no-noise"], tmp_path, "c")
    assert code == 0
    _, rows = validate_csv(out2 / "contingency.csv")
    summary = [r for r in rows if r["kind"] == "summary"]
    assert len(summary) == 1 and summary[0]["collisions"] == "0"
    assert int(summary[0]["trials"]) == sum(1 for r in rows if r["kind"] == "trial") // 2


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["plan", "--env", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err
    assert cli.main(["plan", "--env", "strait", "--k", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["plan", "--env", "strait", "--start", "1,2,3", "--out", str(tmp_path)]) == 2
    assert cli.main(["plan", "--env", "strait", "--sigma", "1.5", "--out", str(tmp_path)]) == 2
    # a wall across the map: no route exists
    env = {"bounds": [0, 0, 100, 100], "obstacles": [[[0, 45], [100, 45], [100, 55], [0, 55]]],
           "field": {"type": "analytic", "generator": "uniform", "params": {"vx": 0.0}},
           "start": [5, 5], "goal": [95, 95]}
    p = tmp_path / "walled.json"
    p.write_text(json.dumps(env))
    assert cli.main(["plan", "--env", str(p), "--out", str(tmp_path / "w")] + FAST) == 3


def test_scenario_export_list_and_validate(tmp_path, capsys):
    assert cli.main(["scenario", "list"]) == 0
    assert "four-gyre" in capsys.readouterr().out.split()
    target = tmp_path / "abl.json"
    assert cli.main(["scenario", "export", "ablation", "--param", "beta_deg=90", "--out", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert doc["field"]["params"]["direction_deg"] == 90
    assert cli.main(["scenario", "export", "ablation", "--param", "nope=1", "--out", str(target)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert cli.main(["validate", str(bad)]) == 2


def test_console_entry_point_runs():
    r = subprocess.run([sys.executable, "-m", "renew.cli", "scenario", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "strait" in r.stdout
