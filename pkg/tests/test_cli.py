"""Command-line behavior: exit codes, outputs, reports, figures."""

from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from shrubkit import graph_from_text, tree_model_from_json
from shrubkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def k4_model(tmp_path, capsys):
    out = tmp_path / "k4.json"
    code, _, _ = run(capsys, "gen", "--family", "clique", "--leaves", "4", "--out", str(out))
    assert code == 0
    return out


# ---------------------------------------------------------------------------
# happy paths
# ---------------------------------------------------------------------------


def test_gen_writes_valid_model(k4_model):
    tm = tree_model_from_json(json.loads(k4_model.read_text()))
    assert tm.d == 1 and tm.r == 1
    assert len(tm.tree.leaves) == 4


def test_gen_random_is_seed_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        code, _, _ = run(
            capsys, "gen", "--family", "random", "--seed", "9", "--d", "2",
            "--r", "2", "--leaves", "6", "--out", str(out),
        )
        assert code == 0
    assert a.read_text() == b.read_text()


def test_interpret_emits_graph_text(k4_model, tmp_path, capsys):
    out = tmp_path / "g.txt"
    code, _, _ = run(capsys, "interpret", str(k4_model), "--out", str(out))
    assert code == 0
    g = graph_from_text(out.read_text())
    assert g.n == 4 and g.m == 6


def test_check_true_and_false(k4_model, capsys):
    code, out, _ = run(
        capsys, "check", str(k4_model), "--formula",
        "(forall x (forall y (imp (not (= x y)) (E x y))))",
    )
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(
        capsys, "check", str(k4_model), "--formula", "(exists x (E x x))"
    )
    assert code == 0 and out.strip() == "false"


def test_equiv_verdicts(tmp_path, capsys):
    k2, k8 = tmp_path / "k2.json", tmp_path / "k8.json"
    run(capsys, "gen", "--family", "clique", "--leaves", "2", "--out", str(k2))
    run(capsys, "gen", "--family", "clique", "--leaves", "8", "--out", str(k8))
    code, out, _ = run(capsys, "equiv", str(k2), str(k8), "--m", "2")
    assert code == 0 and out.strip() == "equivalent"
    code, out, _ = run(capsys, "equiv", str(k2), str(k8), "--m", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "inequivalent"
    assert lines[1].startswith("(")  # a distinguishing sentence follows


def test_equiv_on_same_file_is_reflexive(k4_model, capsys):
    code, out, _ = run(capsys, "equiv", str(k4_model), str(k4_model), "--m", "1")
    assert code == 0 and out.strip() == "equivalent"


def test_chi_output_parses_and_holds(k4_model, tmp_path, capsys):
    code, out, _ = run(capsys, "chi", str(k4_model), "--m", "1")
    assert code == 0
    from shrubkit import evaluate, interpret, parse_formula
    from shrubkit.logic import Structure

    sentence = parse_formula(out.strip())
    tm = tree_model_from_json(json.loads(k4_model.read_text()))
    assert evaluate(Structure.from_graph(interpret(tm), num_labels=tm.r), sentence)


def test_shrink_tree_model_with_report_and_figure(tmp_path, capsys):
    k8 = tmp_path / "k8.json"
    run(capsys, "gen", "--family", "clique", "--leaves", "8", "--out", str(k8))
    out = tmp_path / "kernel.json"
    gout = tmp_path / "kernel.txt"
    rep = tmp_path / "report.json"
    fig = tmp_path / "report.png"
    code, stdout, _ = run(
        capsys, "shrink", str(k8), "--m", "2", "--policy", "auto",
        "--out", str(out), "--graph-out", str(gout),
        "--report", str(rep), "--fig", str(fig),
    )
    assert code == 0
    assert "8 -> 2" in stdout or "-> 2" in stdout
    kernel = graph_from_text(gout.read_text())
    assert kernel.n == 2 and kernel.m == 1
    blob = json.loads(rep.read_text())
    assert blob["verified"] is True
    assert fig.exists() and fig.stat().st_size > 0


def test_bounds_text_and_json(capsys):
    code, out, _ = run(capsys, "bounds", "--d", "1", "--p", "1", "--m", "1")
    assert code == 0
    assert "g(1) = 28" in out
    assert "h(1) = 56" in out
    code, out, _ = run(capsys, "bounds", "--d", "1", "--p", "1", "--m", "1", "--json")
    blob = json.loads(out)
    assert blob["g(1)"] == 28
    assert blob["zeta(1, 1, 1, 1)"] == 2 ** 56  # fits in 64 bits, stays exact
    assert isinstance(blob["rho(1, 1, 1)"], str)  # past 64 bits: descriptive


def test_index_csv_columns_and_values(tmp_path, capsys):
    out = tmp_path / "census.csv"
    fig = tmp_path / "census.png"
    code, _, _ = run(
        capsys, "index", "--d", "0,1", "--p", "1,2", "--m", "1",
        "--max-nodes", "4", "--out", str(out), "--fig", str(fig),
    )
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0].keys()) == ["d", "p", "m", "maxNodes", "classes", "wallclock_ms"]
    by_key = {(r["d"], r["p"]): int(r["classes"]) for r in rows}
    assert by_key[("0", "1")] == 1
    assert by_key[("0", "2")] == 2
    assert fig.exists()


def test_index_jobs_output_independent_of_parallelism(tmp_path, capsys):
    seq = tmp_path / "seq.csv"
    par = tmp_path / "par.csv"
    args = ["index", "--d", "1", "--p", "1,2", "--m", "1,2", "--max-nodes", "4", "--no-fig"]
    run(capsys, *args, "--out", str(seq))
    run(capsys, *args, "--out", str(par), "--jobs", "2")

    def strip_time(path):
        return [
            {k: v for k, v in row.items() if k != "wallclock_ms"}
            for row in csv.DictReader(path.open())
        ]

    assert strip_time(seq) == strip_time(par)


def test_bench_on_k8(tmp_path, capsys):
    k8 = tmp_path / "k8.json"
    run(capsys, "gen", "--family", "clique", "--leaves", "8", "--out", str(k8))
    out = tmp_path / "bench.csv"
    code, stdout, _ = run(
        capsys, "bench", "--model", str(k8), "--m", "2", "--corpus-size", "12",
        "--seed", "5", "--out", str(out), "--no-fig",
    )
    assert code == 0
    assert "verdict agreement: 100%" in stdout
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 12
    assert set(rows[0].keys()) == {"formula", "rank", "naive_ms", "kernel_ms", "verdict"}


def test_recognize_subcommand(tmp_path, capsys):
    gpath = tmp_path / "k3.txt"
    gpath.write_text("3 3\n0 1\n0 2\n1 2\n")
    mpath = tmp_path / "model.json"
    code, out, _ = run(
        capsys, "recognize", str(gpath), "--r", "1", "--d", "1", "--out", str(mpath)
    )
    assert code == 0
    assert out.startswith("found")
    tm = tree_model_from_json(json.loads(mpath.read_text()))
    assert len(tm.tree.leaves) == 3


# ---------------------------------------------------------------------------
# exit codes and error reporting
# ---------------------------------------------------------------------------


def test_usage_error_missing_file(capsys):
    code, _, err = run(capsys, "interpret", "/nonexistent/path.json")
    assert code == 1
    assert err.startswith("code=usage:")


def test_usage_error_random_without_seed(capsys):
    code, _, err = run(capsys, "gen", "--family", "random")
    assert code == 1
    assert "seed" in err


def test_usage_error_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1
    assert err.startswith("code=usage:")


def test_validation_error_bad_model(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(
        '{"d": 1, "r": 1, "signature": [[1, 1, 5]],'
        ' "tree": {"label": 2, "children": [{"label": 1}]}}'
    )
    code, _, err = run(capsys, "interpret", str(bad))
    assert code == 2
    assert err.startswith("code=validation:")


def test_validation_error_formula_syntax(k4_model, capsys):
    code, _, err = run(capsys, "check", str(k4_model), "--formula", "(bogus x)")
    assert code == 2
    assert err.startswith("code=validation:")


def test_validation_error_malformed_json(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text('{"tree": ')
    code, _, err = run(capsys, "interpret", str(broken))
    assert code == 2


def test_resource_error_exit_code(tmp_path, capsys):
    k2, k8 = tmp_path / "k2.json", tmp_path / "k8.json"
    run(capsys, "gen", "--family", "clique", "--leaves", "2", "--out", str(k2))
    run(capsys, "gen", "--family", "clique", "--leaves", "8", "--out", str(k8))
    code, _, err = run(capsys, "equiv", str(k2), str(k8), "--m", "3", "--size-limit", "4")
    assert code == 3
    assert err.startswith("code=resource:")


def test_fixed_policy_requires_cap(k4_model, capsys):
    code, _, err = run(capsys, "shrink", str(k4_model), "--m", "1", "--policy", "fixed")
    assert code == 1
    assert "cap" in err


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "shrubkit.cli", "bounds", "--d", "1"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    assert "g(1) = 28" in proc.stdout
