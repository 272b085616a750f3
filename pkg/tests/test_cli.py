from __future__ import annotations

import json
import subprocess
import sys

import pytest

from threadmod.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def site_values(report, site="main:x=g"):
    (s,) = [s for s in report["sites"] if s["site"] == site]
    return s["value"]["set"]


def test_run_protection_and_mine(capsys):
    code, out, _ = run(capsys, "run", "ex1", "--analysis", "protection")
    assert code == 0
    rep = json.loads(out)
    assert rep["analysis"] == "protection" and site_values(rep) == [0, 17]
    assert set(rep["stats"]) == {"rhs_evaluations", "unknowns_materialized", "restarts"}
    code, out, _ = run(capsys, "run", "ex1", "-a", "mine")
    assert site_values(json.loads(out)) == [0, 17, 42]


def test_run_is_byte_identical(capsys):
    outs = {run(capsys, "run", "ex43", "-a", "protection-otf,write", "--dump-states")[1] for _ in range(3)}
    assert len(outs) == 1
    reps = json.loads(outs.pop())
    assert [r["analysis"] for r in reps] == ["protection-otf", "write"]
    assert "M[g]" in reps[0]["states"]


def test_run_file_path_and_table(capsys, tmp_path):
    p = tmp_path / "prog.toy"
    p.write_text("global g;\nthread main { g = 3; x = g; }\n")
    code, out, _ = run(capsys, "run", str(p), "--format", "table")
    assert code == 0 and "{3}" in out and "main:x=g" in out


def test_run_dot(capsys):
    code, out, _ = run(capsys, "run", "ex2", "--format", "dot")
    assert code == 0 and out.startswith("digraph")


def test_timing_flag(capsys):
    rep = json.loads(run(capsys, "run", "ex1", "--timing")[1])
    assert rep["wall_time_s"] >= 0


def test_parse_error_exit_code(capsys, tmp_path):
    p = tmp_path / "bad.toy"
    p.write_text("thread main {\n  x = ;\n}\n")
    code, _, err = run(capsys, "run", str(p))
    assert code == 1 and "bad.toy:2:" in err


def test_missing_file(capsys):
    assert run(capsys, "run", "no/such/file.toy")[0] == 1


def test_unknown_analysis(capsys):
    assert run(capsys, "run", "ex1", "-a", "bogus")[0] == 1


def test_budget_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("CONC_AI_BUDGET", "4")
    code, _, err = run(capsys, "run", "ex1")
    assert code == 2 and "budget" in err


def test_trace_solver_logs(capsys):
    code, _, err = run(capsys, "run", "single", "--trace-solver")
    assert code == 0 and "eval [" in err


def test_compare_write_best_on_43(capsys):
    code, out, _ = run(capsys, "compare", "ex43", "-a", "write,lock,protection")
    rep = json.loads(out)
    assert rep["summary"]["strictly_best"]["write"] == ["main:x=g"]
    m = rep["matrix"]["main:x=g"]
    assert m["write"]["lock"] == "<" and m["lock"]["write"] == ">"
    assert all(m[a][a] == "=" for a in rep["analyses"])


def test_compare_lock_best_on_44(capsys):
    rep = json.loads(run(capsys, "compare", "ex44", "-a", "write", "-a", "lock")[1])
    assert rep["summary"]["strictly_best"]["lock"] == ["main:x=g"]


def test_compare_same_analysis_twice(capsys):
    rep = json.loads(run(capsys, "compare", "ex1", "-a", "write,write")[1])
    assert rep["analyses"] == ["write", "write#2"]
    assert rep["summary"]["tied"] == ["main:x=g"]


def test_compare_needs_two(capsys):
    assert run(capsys, "compare", "ex1", "-a", "write")[0] == 1


def test_compare_table(capsys):
    code, out, _ = run(capsys, "compare", "ex44", "--format", "table")
    assert code == 0 and "main:x=g" in out


def test_oracle_pass(capsys):
    code, out, _ = run(capsys, "oracle", "ex1")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "PASS"
    assert rep["concrete"]["sites"]["main:x=g"] == ["0", "17"]


def test_oracle_small_bound(capsys):
    code, out, _ = run(capsys, "oracle", "ex1", "--bound", "1", "--format", "table")
    assert code == 0 and "bound reached" in out


def test_oracle_dump_traces(capsys, tmp_path):
    code, out, _ = run(capsys, "oracle", "ex2", "--dump-traces", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.glob("*.dot"))
    assert len(files) == json.loads(out)["concrete"]["traces"] == 16


def test_oracle_bad_input_set(capsys):
    assert run(capsys, "oracle", "ex1", "--input-set", "a,b")[0] == 1


def test_corpus_listing(capsys):
    code, out, _ = run(capsys, "corpus")
    names = out.split()
    assert code == 0 and len(names) >= 15 and "ex43" in names


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "threadmod.cli", "run", "single"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["program"] == "single"
