import io
import subprocess
import sys

import numpy as np
import pytest

from pdrcd import cli
from pdrcd.generators import gen_random
from pdrcd.matrix import write_libsvm
from pdrcd.solvers import TRACE_COLUMNS, read_trace_csv


def run(argv):
    out = io.StringIO()
    code = cli.main(argv, out=out)
    return code, out.getvalue()


def record_of(text):
    line = [l for l in text.splitlines() if l.startswith("d=")][-1]
    return dict(kv.split("=", 1) for kv in line.split())


def test_parse_lambda():
    assert cli.parse_lambda("1/n", 40) == 1 / 40
    assert cli.parse_lambda("2/n", 40) == 2 / 40
    assert cli.parse_lambda("0.5", 40) == 0.5
    for bad in ("x", "0", "-1", "a/n"):
        with pytest.raises(cli.UsageError):
            cli.parse_lambda(bad, 10)


def test_analyze_ones_is_tie(tmp_path):
    rec_path = tmp_path / "rec.txt"
    code, out = run(["analyze", "--gen", "ones:3x3", "--record", str(rec_path)])
    assert code == 0
    rec = record_of(out)
    assert rec["rec"] == "Tie" and float(rec["ratio"]) == 1.0
    assert rec_path.read_text().strip() == [l for l in out.splitlines() if l.startswith("d=")][-1]


def test_analyze_worst_dual_sparse():
    code, out = run(["analyze", "--gen", "worst-dual:100x1000:a=10000", "--beta", "0.25"])
    rec = record_of(out)
    assert code == 0 and rec["rec"] == "Dual" and float(rec["ratio"]) > 1


def test_analyze_tall_dense_prefers_primal(tmp_path):
    X = gen_random(400, 20, mu=0.3, seed=1)
    path = tmp_path / "tall.svm"
    write_libsvm(X, np.ones(20), path)
    code, out = run(["analyze", "--libsvm", str(path), "--lambda", "1/n"])
    assert code == 0 and record_of(out)["rec"] == "Primal"


def test_analyze_usage_errors(tmp_path):
    assert run(["analyze"])[0] == 2
    assert run(["analyze", "--gen", "ones:3x3", "--libsvm", "x"])[0] == 2
    assert run(["analyze", "--gen", "bogus:3x3"])[0] == 2
    assert run(["analyze", "--libsvm", str(tmp_path / "missing.svm")])[0] == 2
    bad = tmp_path / "bad.svm"
    bad.write_text("1 0:1\n")
    assert run(["analyze", "--libsvm", str(bad)])[0] == 2
    assert run(["analyze", "--gen", "ones:3x3", "--lambda", "zero"])[0] == 2


def test_analyze_bound_violation_exit_code(monkeypatch):
    import pdrcd.analyzer as an
    monkeypatch.setattr(an, "cost_cp", lambda X: 1e12)
    monkeypatch.setattr(cli, "recommend", lambda X, lam, beta: an.recommend(X, lam, beta))
    code, _ = run(["analyze", "--gen", "random:4x5"])
    assert code == 1


def test_solve_squared_dual_libsvm(tmp_path):
    X = gen_random(6, 10, seed=2)
    y = np.random.default_rng(0).normal(size=10)
    path = tmp_path / "tiny.txt"
    write_libsvm(X, y, path)
    trace_path = tmp_path / "dual.csv"
    code, out = run(["solve", "--libsvm", str(path), "--loss", "squared", "--side", "dual",
                     "--stop-gap", "1e-8", "--trace", str(trace_path)])
    assert code == 0 and "stop=target_gap" in out
    trace = read_trace_csv(trace_path)
    assert trace.rows[-1]["gap"] <= 1e-8
    assert trace_path.read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)


def test_solve_both_writes_two_traces(tmp_path):
    base = tmp_path / "run.csv"
    code, out = run(["solve", "--gen", "worst-dual:30x30:nnz=100%", "--loss", "logistic",
                     "--labels", "random", "--both", "--max-passes", "3", "--trace", str(base)])
    assert code == 0
    for side in ("primal", "dual"):
        rows = read_trace_csv(tmp_path / f"run.{side}.csv").rows
        assert rows[-1]["passes"] >= 3
        assert (tmp_path / f"run.{side}.csv.meta.json").exists()


def test_solve_primal_stop_gap_uses_suboptimality():
    code, out = run(["solve", "--gen", "random:10x15", "--side", "primal",
                     "--stop-gap", "1e-6", "--max-passes", "200"])
    assert code == 0 and "primal: stop=target_subopt" in out


def test_solve_missing_file():
    assert run(["solve", "--libsvm", "/nonexistent/file.svm"])[0] == 2


def test_bench_grid_deterministic_and_dnf(tmp_path):
    args = ["bench", "--n", "100", "--nnz", "10,100", "--max-passes", "0.5"]
    code, _ = run(args + ["--out", str(tmp_path / "a")])
    assert code == 0
    code, _ = run(args + ["--out", str(tmp_path / "b"), "--jobs", "2"])
    a = (tmp_path / "a" / "summary.csv").read_text()
    b = (tmp_path / "b" / "summary.csv").read_text()
    assert a == b
    lines = a.strip().splitlines()
    assert len(lines) == 3 and "DNF" in lines[1]
    assert (tmp_path / "a" / "d100_n100_nnz10_seed0_primal.csv").exists()


def test_bench_reaches_target(tmp_path):
    code, out = run(["bench", "--n", "100", "--nnz", "10", "--target", "1e-3", "--out", str(tmp_path)])
    row = out.splitlines()[1].split(",")
    assert code == 0 and row[5] != "DNF" and row[6] != "DNF" and row[8] == "Primal"


def test_bench_partial_failure_keeps_going(tmp_path, monkeypatch):
    real = cli.generators.from_spec

    def flaky(spec, seed=0):
        if "nnz=100" in spec:
            raise RuntimeError("boom")
        return real(spec, seed)

    monkeypatch.setattr(cli.generators, "from_spec", flaky)
    code, out = run(["bench", "--n", "100", "--nnz", "10,100", "--max-passes", "0.2",
                     "--out", str(tmp_path)])
    lines = out.splitlines()
    assert code == 0
    assert lines[1].endswith(",ok") and "error: RuntimeError" in lines[2]


def test_default_grid_has_nine_cells():
    args = cli.build_parser().parse_args(["bench"])
    assert len(args.n) * len(args.nnz) == 9 and args.d == 100


def test_console_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "pdrcd.cli", "analyze", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "worst-dual" in res.stdout
