import json
import subprocess
import sys
import urllib.request

import pytest

from rulplan.cli import main
from rulplan.ga import read_history_csv
from rulplan.model import AssetRecord, Point2D, ProblemInstance, dump_instance, load_instance
from rulplan.service import PlanReport

FAST = ["--pop", "20", "--gens", "5", "--elitism", "2"]


def test_gen_twice_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen", "--n", "8", "--seed", "7", "-o", str(a)]) == 0
    assert main(["gen", "--n", "8", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_instance(a).n == 8


def test_gen_zero_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "0", "-o", str(tmp_path / "x.json")])
    assert exc.value.code == 2


def test_gen_fixed_rul(tmp_path):
    out = tmp_path / "i.json"
    main(["gen", "--n", "5", "--seed", "1", "--rul-min", "5", "--rul-max", "5", "-o", str(out)])
    assert [a["rul"] for a in json.loads(out.read_text())["assets"]] == [5.0] * 5


def test_gen_without_seed_prints_it(tmp_path, capsys):
    main(["gen", "--n", "2", "-o", str(tmp_path / "i.json")])
    assert capsys.readouterr().err.startswith("seed: ")


def test_gen_bad_rul_range_exits_2(tmp_path):
    assert main(["gen", "--n", "3", "--seed", "1", "--rul-min", "9", "--rul-max", "2", "-o", str(tmp_path / "i.json")]) == 2


def test_solve_single_asset(tmp_path):
    inst = tmp_path / "one.json"
    dump_instance(ProblemInstance(Point2D(0, 0), (AssetRecord("only", Point2D(1, 1), 9.0),)), inst)
    plan = tmp_path / "plan.json"
    assert main(["solve", str(inst), "--seed", "1", "--plan", str(plan), *FAST]) == 0
    assert PlanReport.from_dict(json.loads(plan.read_text())).asset_ids == ["only"]


def test_solve_twice_byte_identical(tmp_path):
    inst = tmp_path / "i.json"
    main(["gen", "--n", "7", "--seed", "3", "-o", str(inst)])
    outs = []
    for k, extra in enumerate([[], ["--workers", "3"]]):
        h, p = tmp_path / f"h{k}.csv", tmp_path / f"p{k}.json"
        main(["solve", str(inst), "--seed", "5", "--history", str(h), "--plan", str(p), *extra])
        outs.append((h.read_bytes(), p.read_bytes()))
    assert outs[0] == outs[1]
    history = read_history_csv(outs[0][0].decode())
    assert len(history) == 31


def test_solve_infeasible_exit_3(tmp_path):
    # every asset is at least 5 km out with rul 4 h: no order can be on time
    assets = tuple(AssetRecord(f"a{i}", Point2D(3.0 * (-1) ** i, 4.0), 4.0) for i in range(3))
    inst = tmp_path / "late.json"
    dump_instance(ProblemInstance(Point2D(0, 0), assets), inst)
    plan = tmp_path / "plan.json"
    assert main(["solve", str(inst), "--seed", "1", "--plan", str(plan), *FAST]) == 3
    assert json.loads(plan.read_text())["feasible"] is False


def test_solve_bad_file_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"center": {"x": 0, "y": 0}, "assets": [{"id": "a", "x": 0, "y": 0, "rul": 0}]}))
    assert main(["solve", str(bad), "--seed", "1"]) == 2
    assert main(["solve", str(tmp_path / "missing.json"), "--seed", "1"]) == 2
    (tmp_path / "junk.json").write_text("{")
    assert main(["solve", str(tmp_path / "junk.json"), "--seed", "1"]) == 2


def test_oracle_collinear(tmp_path, capsys):
    assets = tuple(AssetRecord(f"A{i}", Point2D(float(i + 1), 0.0), 100.0) for i in range(3))
    inst = tmp_path / "line.json"
    dump_instance(ProblemInstance(Point2D(0, 0), assets), inst)
    for method in ("exhaustive", "held-karp"):
        out = tmp_path / f"{method}.json"
        assert main(["oracle", str(inst), "--method", method, "-o", str(out)]) == 0
        plan = json.loads(out.read_text())
        assert plan["total_distance"] == 3.0
        assert [v["asset_id"] for v in plan["visits"]] == ["A0", "A1", "A2"]
        assert main(["verify", str(out), str(inst)]) == 0


def test_oracle_too_large(tmp_path):
    inst = tmp_path / "big.json"
    main(["gen", "--n", "12", "--seed", "1", "-o", str(inst)])
    assert main(["oracle", str(inst), "--method", "exhaustive"]) == 4


def test_verify_detects_tampering(tmp_path):
    inst = tmp_path / "i.json"
    main(["gen", "--n", "5", "--seed", "2", "-o", str(inst)])
    plan = tmp_path / "p.json"
    main(["solve", str(inst), "--seed", "2", "--plan", str(plan), *FAST])
    assert main(["verify", str(plan), str(inst)]) == 0
    data = json.loads(plan.read_text())
    data["visits"][0]["slack"] += 1.0
    plan.write_text(json.dumps(data))
    assert main(["verify", str(plan), str(inst)]) == 1


def test_compare_small(tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--count", "3", "--n", "5", "--seed", "1", "--csv", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,n,oracle_distance,ga_distance,relative_gap,ga_feasible,oracle_ms,ga_ms"
    assert len(lines) == 4
    assert "optimal_hit_rate=" in capsys.readouterr().out


def test_compare_too_large():
    assert main(["compare", "--count", "1", "--n", "11", "--method", "exhaustive", "--seed", "1", *FAST]) == 4


def test_serve_smoke(tmp_path):
    port_file = tmp_path / "log.jsonl"
    proc = subprocess.Popen(
        [sys.executable, "-m", "rulplan", "serve", "--port", "0", "--log", str(port_file)],
        stdout=subprocess.PIPE,
        text=True,
    )
    try:
        line = proc.stdout.readline()
        base = line.split()[2]
        req = urllib.request.Request(
            base + "/assets",
            data=json.dumps({"asset_id": "A", "x": 1, "y": 1, "rul": 9, "timestamp": "2026-05-01T00:00:00Z"}).encode(),
            method="POST",
        )
        assert json.loads(urllib.request.urlopen(req, timeout=10).read()) == {"version": 1}
        req = urllib.request.Request(base + "/plans", data=b'{"seed": 1}', method="POST")
        plan = json.loads(urllib.request.urlopen(req, timeout=60).read())
        assert [v["asset_id"] for v in plan["visits"]] == ["A"]
    finally:
        proc.terminate()
        proc.wait(timeout=10)
