"""Matplotlib renderings of the delimited reports, written next to them."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_shrink_figure(report_json: dict, path: str) -> str:
    """Before/after sizes plus per-level child counts for one shrink run."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    labels = ["input", "kernel"]
    sizes = [report_json["input_size"], report_json["output_size"]]
    ax1.bar(labels, sizes, color=["#888888", "#2a6fb0"])
    if "input_vertices" in report_json:
        ax1.bar(
            labels,
            [report_json["input_vertices"], report_json["output_vertices"]],
            color=["#cccccc", "#7fb0d8"],
            width=0.4,
        )
        ax1.legend(["tree nodes", "graph vertices"], fontsize=8)
    ax1.set_ylabel("size")
    ax1.set_title(f"mode={report_json['mode']} m={report_json['m']}")

    heights = sorted(int(k) for k in report_json["level_children"])
    before = [report_json["level_children"][str(h)][0] for h in heights]
    after = [report_json["level_children"][str(h)][1] for h in heights]
    xs = range(len(heights))
    ax2.bar([x - 0.2 for x in xs], before, width=0.4, label="children before")
    ax2.bar([x + 0.2 for x in xs], after, width=0.4, label="children after")
    ax2.set_xticks(list(xs))
    ax2.set_xticklabels([str(h) for h in heights])
    ax2.set_xlabel("subtree height")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_index_figure(rows: list[dict], path: str) -> str:
    """Realized class counts against the node budget, one line per case."""
    fig, ax = plt.subplots(figsize=(6, 4))
    series: dict[tuple, list[tuple[int, int]]] = {}
    for row in rows:
        key = (row["d"], row["p"], row["m"])
        series.setdefault(key, []).append((row["maxNodes"], row["classes"]))
    for key in sorted(series):
        pts = sorted(series[key])
        ax.plot(
            [x for x, _ in pts],
            [y for _, y in pts],
            marker="o",
            label=f"d={key[0]} p={key[1]} m={key[2]}",
        )
    ax.set_xlabel("max nodes")
    ax.set_ylabel("rank-m classes realized")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_bench_figure(rows: list[dict], path: str) -> str:
    """Per-sentence evaluation times on the input graph vs the kernel."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    naive = [row["naive_ms"] for row in rows]
    kernel = [row["kernel_ms"] for row in rows]
    ax1.scatter(naive, kernel, s=12, alpha=0.7)
    top = max(max(naive, default=1), max(kernel, default=1))
    ax1.plot([0, top], [0, top], color="#999999", linewidth=0.8)
    ax1.set_xlabel("on input graph (ms)")
    ax1.set_ylabel("on kernel (ms)")
    ax2.bar(["input graph", "kernel"], [sum(naive), sum(kernel)], color=["#888888", "#2a6fb0"])
    ax2.set_ylabel("total evaluation time (ms)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
