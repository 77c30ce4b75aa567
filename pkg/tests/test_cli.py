import json
import subprocess
import sys

import pytest

from levilab.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, list_examples, main, run
from levilab.scenario import bundled_scenarios


def _report(out):
    return json.loads((out / "report.json").read_text())


def _tasks(out):
    return {t["id"]: t for t in _report(out)["tasks"]}


def test_ball_scenario_has_no_negative_verdicts(tmp_path):
    assert run("ball_psh", tmp_path, threads=1) == EXIT_OK
    tasks = _tasks(tmp_path)
    for tid in ("norm2_strict_psh", "boundary_levi", "neglog_distance"):
        assert tasks[tid]["status"] == "ok"
        assert tasks[tid]["result"]["counts"]["certified_no"] == 0
    assert tasks["neglog_norm_local_max"]["result"]["violation"] is False
    assert (tmp_path / "report.txt").read_text().startswith("scenario ball_psh")


def test_ex58_scenario_summary(tmp_path):
    assert run("ex58", tmp_path, threads=1) == EXIT_OK
    tasks = _tasks(tmp_path)
    assert tasks["homogeneity"]["result"]["pass"]
    assert tasks["basener"]["result"]["pass"]
    off = tasks["certificate_off_axis"]["result"]
    assert off["overall"] == "certified" and off["summary"]["dims_H"] == [1]
    near = tasks["certificate_near_axis"]["result"]
    assert near["overall"] == "refuted" and near["summary"]["dims_H"] == [1, 2]


def test_malformed_scenario_points_at_the_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "bad", "tasks": [{"op": "classify_qpsh", "expr": "z1 +", "q": 0,
                                                         "points": [[0.1]]}]}))
    assert run(str(bad), tmp_path / "out") == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert "/tasks/0/expr" in err
    bad.write_text("{not json")
    assert run(str(bad), tmp_path / "out") == EXIT_VALIDATION
    bad.write_text(json.dumps({"tasks": [{"op": "frobnicate"}]}))
    assert run(str(bad), tmp_path / "out") == EXIT_VALIDATION
    assert "/tasks/0/op" in capsys.readouterr().err


def test_missing_scenario_is_a_validation_error(tmp_path):
    assert run("no_such_scenario", tmp_path) == EXIT_VALIDATION


def test_list_is_sorted(capsys):
    assert main(["list"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text == list_examples()
    examples = text.split("scenarios:")[0].splitlines()[1:]
    names = [line.split()[0] for line in examples]
    assert names == sorted(names) and "ex58" in names and "uk" in names
    assert list(bundled_scenarios()) == sorted(bundled_scenarios())


def test_reports_are_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("quadric_index", a, seed=5, threads=1) == EXIT_OK
    assert run("quadric_index", b, seed=5, threads=3) == EXIT_OK
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_failing_task_is_isolated(tmp_path):
    base = {
        "name": "iso",
        "seed": 1,
        "objects": {"F": {"type": "graph", "construct": "fv_abs2"},
                    "L": {"type": "graph", "construct": "leviflat_im_z2"}},
        "tasks": [
            {"id": "cert", "op": "certificate", "graph": "L", "q": 1, "samples": {"n": 8}},
            {"id": "leaf", "op": "trace", "graph": "L", "start": [0, 0], "steps": 5},
        ],
    }
    good = tmp_path / "good.json"
    good.write_text(json.dumps(base))
    assert run(str(good), tmp_path / "g", threads=1) == EXIT_OK
    base["tasks"][1]["graph"] = "F"  # not foliated: tracing must fail
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(base))
    assert run(str(bad), tmp_path / "b", threads=1) == EXIT_RUNTIME
    g, b = _tasks(tmp_path / "g"), _tasks(tmp_path / "b")
    assert b["cert"] == g["cert"]
    assert b["leaf"]["status"] == "error" and b["leaf"]["error"]["type"] == "PreconditionError"


def test_threads_must_be_positive(tmp_path, capsys):
    assert main(["run", "ball_psh", "--threads", "0", "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "--threads" in capsys.readouterr().err


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "levilab.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "scenarios:" in proc.stdout


def test_unknown_command_exits_with_usage():
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 2
