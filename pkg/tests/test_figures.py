"""Figure rendering for shrink reports, census sweeps, and bench tables."""

from __future__ import annotations

import json
import random

from conftest import random_model
from shrubkit import CapPolicy, shrink_graph_with_report
from shrubkit.figures import save_bench_figure, save_index_figure, save_shrink_figure


def test_save_shrink_figure(tmp_path):
    rng = random.Random(1)
    tm = random_model(rng, 2, 2, 12, 0.5)
    _, _, report = shrink_graph_with_report(tm, 1, CapPolicy.auto())
    path = tmp_path / "shrink.png"
    out = save_shrink_figure(json.loads(report.dumps()), str(path))
    assert out == str(path)
    assert path.stat().st_size > 0


def test_save_index_figure(tmp_path):
    rows = [
        {"d": 1, "p": 1, "m": 1, "maxNodes": n, "classes": c, "wallclock_ms": 1.0}
        for n, c in [(2, 2), (4, 2), (6, 2)]
    ] + [
        {"d": 1, "p": 2, "m": 1, "maxNodes": n, "classes": c, "wallclock_ms": 1.0}
        for n, c in [(2, 4), (4, 8), (6, 8)]
    ]
    path = tmp_path / "index.png"
    assert save_index_figure(rows, str(path)) == str(path)
    assert path.stat().st_size > 0


def test_save_bench_figure(tmp_path):
    rows = [
        {"formula": i, "rank": 2, "naive_ms": 2.0 + i, "kernel_ms": 0.5, "verdict": "true"}
        for i in range(6)
    ]
    path = tmp_path / "bench.png"
    assert save_bench_figure(rows, str(path)) == str(path)
    assert path.stat().st_size > 0
