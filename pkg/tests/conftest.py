"""Shared random generators and acceptance reporting for the test suite.

All generators take an explicit random.Random so every test is
reproducible from its own seed.
"""

from __future__ import annotations

import random

from shrubkit import Graph, LabeledTree, Signature, TreeModel

# one line per acceptance criterion, printed by pytest_terminal_summary so
# the verdicts survive output capture
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> bool:
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number:02d} ({title}): {verdict} - {detail}"
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


def random_tree(rng: random.Random, d: int, p: int, max_nodes: int) -> LabeledTree:
    """Random labeled tree of height <= d with <= max_nodes nodes."""
    nodes: dict[int, int | None] = {0: None}
    depth = {0: 0}
    height = rng.randint(0, d)
    frontier = [0]
    nid = 1
    while frontier and nid < max_nodes:
        nxt = []
        for u in frontier:
            if depth[u] >= height:
                continue
            for _ in range(rng.randint(1, 3)):
                if nid >= max_nodes:
                    break
                nodes[nid] = u
                depth[nid] = depth[u] + 1
                nxt.append(nid)
                nid += 1
        frontier = nxt
    labels = {v: rng.randint(1, p) for v in nodes}
    return LabeledTree(p, 0, nodes, labels)


def random_model(rng: random.Random, d: int, r: int, leaves: int, density: float) -> TreeModel:
    """Random tree model: leaves at depth exactly d, labels in [r]."""
    if d == 0:
        nested: dict = {"label": rng.randint(1, r)}
    else:
        level: list[dict] = [{"label": rng.randint(1, r)} for _ in range(leaves)]
        for depth_left in range(d, 0, -1):
            if depth_left == 1:
                level = [{"label": r + 1, "children": level}]
            else:
                groups: list[dict] = []
                i = 0
                while i < len(level):
                    width = min(rng.randint(1, 3), len(level) - i)
                    groups.append({"label": r + 1, "children": level[i : i + width]})
                    i += width
                level = groups
        nested = level[0]
    tree = LabeledTree.from_nested(r + 1, nested)
    triples = [
        (i, j, l)
        for i in range(1, r + 1)
        for j in range(i, r + 1)
        for l in range(1, d + 1)
        if rng.random() < density
    ]
    return TreeModel(tree, Signature.make(r, d, triples))


def random_graph(rng: random.Random, n: int, r: int, density: float = 0.5) -> Graph:
    vs = frozenset(range(n))
    es = frozenset(
        frozenset((u, v))
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < density
    )
    labels = {v: rng.randint(1, r) for v in range(n)}
    return Graph(vs, es, labels)


def permuted_graph(rng: random.Random, g: Graph) -> Graph:
    """Isomorphic copy of g with vertex ids shuffled in place."""
    vs = sorted(g.vertices)
    perm = dict(zip(vs, rng.sample(vs, len(vs))))
    es = frozenset(frozenset((perm[u], perm[v])) for u, v in g.edge_pairs())
    labels = None if g.labels is None else {perm[v]: g.labels[v] for v in vs}
    return Graph(frozenset(perm.values()), es, labels)
