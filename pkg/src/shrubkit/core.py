"""Labeled rooted trees, edge signatures, tree models, and finite graphs.

A tree model is a pair (t, S): t is a rooted tree of height exactly d whose
leaves carry labels from [r] and whose internal nodes carry the reserved
label r+1, and S is a symmetric set of triples (i, j, l) in [r] x [r] x [d].
The model denotes the graph on the leaves of t where leaves u, v are adjacent
iff (label(u), label(v), l) is in S for l = (tree distance between u and v)/2.

Node ids are stable: every derived tree (restriction, kernel) reuses the ids
of the tree it came from, so "induced subgraph" can be checked literally as
id-set inclusion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping

from .errors import StructuralError, ValidationError

# Canonical code of a labeled rooted tree: (label, sorted child codes).
CanonicalCode = tuple


@dataclass(frozen=True)
class LabeledTree:
    """Rooted tree with integer node ids and node labels in [p].

    Treated as immutable after construction; all derived views are cached.
    """

    p: int
    root: int
    parent: Mapping[int, int | None]
    label: Mapping[int, int]

    def __post_init__(self) -> None:
        if self.p < 1:
            raise StructuralError(f"label alphabet size must be >= 1, got {self.p}")
        if set(self.parent) != set(self.label):
            raise StructuralError("parent map and label map cover different node ids")
        if self.root not in self.parent:
            raise StructuralError(f"root id {self.root} is not a node")
        if self.parent[self.root] is not None:
            raise StructuralError("root must have parent None")
        for v, u in self.parent.items():
            if u is None:
                if v != self.root:
                    raise StructuralError(f"node {v} has no parent but is not the root")
            elif u not in self.parent:
                raise StructuralError(f"node {v} has unknown parent {u}")
        for v, lab in self.label.items():
            if not 1 <= lab <= self.p:
                raise StructuralError(f"node {v} label {lab} outside [1, {self.p}]")
        # Reject cycles / disconnection: every node must reach the root.
        for v in self.parent:
            seen = set()
            u: int | None = v
            while u is not None:
                if u in seen:
                    raise StructuralError(f"parent pointers cycle at node {u}")
                seen.add(u)
                u = self.parent[u]
            # loop exits only via the root, whose parent is None

    @cached_property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.parent))

    @cached_property
    def size(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {v: [] for v in self.parent}
        for v in self.node_ids:
            u = self.parent[v]
            if u is not None:
                out[u].append(v)
        return {v: tuple(kids) for v, kids in out.items()}

    @cached_property
    def depth(self) -> dict[int, int]:
        out = {self.root: 0}
        stack = [self.root]
        while stack:
            u = stack.pop()
            for c in self.children[u]:
                out[c] = out[u] + 1
                stack.append(c)
        return out

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in self.node_ids if not self.children[v])

    @cached_property
    def height(self) -> int:
        return max(self.depth.values())

    def subtree_ids(self, v: int) -> set[int]:
        """All ids in the subtree rooted at v (v included)."""
        if v not in self.parent:
            raise StructuralError(f"unknown node id {v}")
        out = set()
        stack = [v]
        while stack:
            u = stack.pop()
            out.add(u)
            stack.extend(self.children[u])
        return out

    def subtree(self, v: int) -> "LabeledTree":
        """Subtree rooted at v as a tree of its own, keeping ids and p."""
        ids = self.subtree_ids(v)
        parent = {u: (None if u == v else self.parent[u]) for u in ids}
        label = {u: self.label[u] for u in ids}
        return LabeledTree(self.p, v, parent, label)

    def subtree_height(self, v: int) -> int:
        return max(self.depth[u] for u in self.subtree_ids(v)) - self.depth[v]

    def restrict_to(self, keep: set[int]) -> "LabeledTree":
        """Restriction to a downward-closed id set containing the root."""
        if self.root not in keep:
            raise StructuralError("restriction must keep the root")
        for v in keep:
            u = self.parent.get(v, v if v == self.root else None)
            if v != self.root and (u is None or u not in keep):
                raise StructuralError(f"kept node {v} lost its parent")
        parent = {v: self.parent[v] for v in keep}
        label = {v: self.label[v] for v in keep}
        return LabeledTree(self.p, self.root, parent, label)

    @classmethod
    def from_nested(cls, p: int, nested: Mapping[str, Any]) -> "LabeledTree":
        """Build from {"label": int, "children": [...]} assigning preorder ids."""
        parent: dict[int, int | None] = {}
        label: dict[int, int] = {}
        counter = 0

        def walk(node: Mapping[str, Any], par: int | None) -> None:
            nonlocal counter
            if not isinstance(node, Mapping) or "label" not in node:
                raise StructuralError("tree node must be an object with a 'label'")
            vid = counter
            counter += 1
            parent[vid] = par
            label[vid] = int(node["label"])
            for child in node.get("children", ()):
                walk(child, vid)

        walk(nested, None)
        return cls(p, 0, parent, label)

    def to_nested(self, v: int | None = None) -> dict[str, Any]:
        """Nested-dict form; children ordered by id for a stable layout."""
        if v is None:
            v = self.root
        out: dict[str, Any] = {"label": self.label[v]}
        kids = self.children[v]
        if kids:
            out["children"] = [self.to_nested(c) for c in kids]
        return out


@dataclass(frozen=True)
class Forest:
    """Ordered sequence of trees over disjoint id spaces."""

    trees: tuple[LabeledTree, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for t in self.trees:
            ids = set(t.node_ids)
            if ids & seen:
                raise StructuralError("forest trees must use disjoint node ids")
            seen |= ids


@dataclass(frozen=True)
class Signature:
    """Symmetric edge signature S subset of [r] x [r] x [d].

    Only canonical triples with i <= j are stored; `triples()` exposes the
    symmetric view.
    """

    r: int
    d: int
    entries: frozenset[tuple[int, int, int]]

    @classmethod
    def make(
        cls,
        r: int,
        d: int,
        triples: Iterable[tuple[int, int, int]],
        strict: bool = False,
    ) -> "Signature":
        """Normalize and range-check input triples.

        With strict=True an asymmetric listing (some (i, j, l) with i != j and
        no matching (j, i, l)) is rejected; otherwise it is symmetrized.
        """
        if r < 1:
            raise StructuralError(f"r must be >= 1, got {r}")
        if d < 0:
            raise StructuralError(f"d must be >= 0, got {d}")
        given = {(int(i), int(j), int(l)) for i, j, l in triples}
        for i, j, l in given:
            if not (1 <= i <= r and 1 <= j <= r):
                raise StructuralError(f"signature labels {(i, j, l)} outside [1, {r}]")
            if not 1 <= l <= d:
                raise StructuralError(f"signature level in {(i, j, l)} outside [1, {d}]")
        if strict:
            for i, j, l in given:
                if i != j and (j, i, l) not in given:
                    raise StructuralError(
                        f"asymmetric signature: {(i, j, l)} present without {(j, i, l)}"
                    )
        canon = frozenset((min(i, j), max(i, j), l) for i, j, l in given)
        return cls(r, d, canon)

    def triples(self) -> frozenset[tuple[int, int, int]]:
        """Full symmetric view."""
        return frozenset(
            {(i, j, l) for i, j, l in self.entries}
            | {(j, i, l) for i, j, l in self.entries}
        )

    def __contains__(self, triple: tuple[int, int, int]) -> bool:
        i, j, l = triple
        return (min(i, j), max(i, j), l) in self.entries


@dataclass(frozen=True)
class TreeModel:
    """A labeled tree over alphabet [r+1] together with an edge signature."""

    tree: LabeledTree
    sig: Signature

    @property
    def d(self) -> int:
        return self.sig.d

    @property
    def r(self) -> int:
        return self.sig.r


@dataclass(frozen=True)
class Violation:
    """One failed validation condition with a concrete witness."""

    condition: int
    witness: Any
    message: str

    def __str__(self) -> str:
        return f"condition {self.condition}: {self.message} (witness {self.witness!r})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[int]:
        return {v.condition for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "valid tree model"
        return "; ".join(str(v) for v in self.violations)


def validate_tree_model(tm: TreeModel) -> ValidationReport:
    """Check the tree-model conditions and report every violation.

    Checked here: (1) every root-to-leaf path has length exactly d,
    (3) leaves are labeled in [r] and internal nodes carry r+1,
    (4) signature triples lie in [r] x [r] x [d] (symmetry holds by
    construction of Signature). Conditions (2) vertex set = leaves and
    (5) the edge rule are definitional for derived graphs: `interpret`
    builds the graph that satisfies them, so they cannot fail here.
    """
    t, sig = tm.tree, tm.sig
    out: list[Violation] = []
    if t.p != sig.r + 1:
        out.append(
            Violation(3, t.root, f"tree alphabet size {t.p} != r+1 = {sig.r + 1}")
        )
    for v in t.leaves:
        if t.depth[v] != sig.d:
            out.append(
                Violation(1, v, f"leaf at depth {t.depth[v]}, expected exactly {sig.d}")
            )
    for v in t.node_ids:
        if t.children[v]:
            if t.label[v] != sig.r + 1:
                out.append(
                    Violation(
                        3, v, f"internal node labeled {t.label[v]}, expected {sig.r + 1}"
                    )
                )
        else:
            if not 1 <= t.label[v] <= sig.r:
                out.append(
                    Violation(3, v, f"leaf labeled {t.label[v]}, outside [1, {sig.r}]")
                )
    for i, j, l in sig.entries:
        if not (1 <= i <= sig.r and 1 <= j <= sig.r and 1 <= l <= sig.d):
            out.append(
                Violation(4, (i, j, l), "signature triple outside [r] x [r] x [d]")
            )
    return ValidationReport(tuple(out))


def require_valid(tm: TreeModel) -> None:
    report = validate_tree_model(tm)
    if not report.ok:
        raise ValidationError(report)


def leaf_hereditary_restrict(t: LabeledTree, deleted: Iterable[int]) -> LabeledTree:
    """Delete the given nodes together with all their descendants.

    The root may not be deleted (the result would be empty). Unknown ids are
    rejected. The result reuses the surviving node ids.
    """
    doomed = set(deleted)
    for v in doomed:
        if v not in t.parent:
            raise StructuralError(f"cannot delete unknown node id {v}")
    if t.root in doomed:
        raise StructuralError("cannot delete the root: result would be empty")
    closure: set[int] = set()
    for v in doomed:
        closure |= t.subtree_ids(v)
    keep = set(t.node_ids) - closure
    return t.restrict_to(keep)


def is_leaf_hereditary_subtree(t2: LabeledTree, t1: LabeledTree) -> bool:
    """True iff t2 is an induced subtree of t1 with the same root whose
    leaves are all leaves of t1."""
    if t2.root != t1.root or t2.p != t1.p:
        return False
    ids1 = set(t1.node_ids)
    for v in t2.node_ids:
        if v not in ids1:
            return False
        if t2.label[v] != t1.label[v]:
            return False
        if v != t2.root and t2.parent[v] != t1.parent[v]:
            return False
    leaves1 = set(t1.leaves)
    return all(v in leaves1 for v in t2.leaves)


def canonical_encode(t: LabeledTree, v: int | None = None) -> CanonicalCode:
    """Isomorphism-invariant code: (label, tuple of sorted child codes)."""
    if v is None:
        v = t.root
    order = []
    stack = [v]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(t.children[u])
    codes: dict[int, CanonicalCode] = {}
    for u in reversed(order):
        codes[u] = (t.label[u], tuple(sorted(codes[c] for c in t.children[u])))
    return codes[v]


@dataclass(frozen=True)
class Graph:
    """Finite simple graph with optional vertex labels."""

    vertices: frozenset[int]
    edges: frozenset[frozenset[int]]
    labels: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        for e in self.edges:
            if len(e) != 2:
                raise StructuralError(f"edge {set(e)} is not a 2-element set")
            if not e <= self.vertices:
                raise StructuralError(f"edge {set(e)} has endpoints outside V")
        if self.labels is not None and set(self.labels) != set(self.vertices):
            raise StructuralError("labels must cover exactly the vertex set")

    @classmethod
    def make(
        cls,
        vertices: Iterable[int],
        edges: Iterable[tuple[int, int]],
        labels: Mapping[int, int] | None = None,
    ) -> "Graph":
        es = set()
        for u, v in edges:
            if u == v:
                raise StructuralError(f"self loop at vertex {u}")
            es.add(frozenset((u, v)))
        return cls(frozenset(vertices), frozenset(es), dict(labels) if labels else None)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def edge_pairs(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        lab_self = dict(self.labels) if self.labels is not None else None
        lab_other = dict(other.labels) if other.labels is not None else None
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and lab_self == lab_other
        )

    def __hash__(self) -> int:
        lab = tuple(sorted(self.labels.items())) if self.labels is not None else None
        return hash((self.vertices, self.edges, lab))


def induced_subgraph(g: Graph, keep: Iterable[int]) -> Graph:
    """Vertex-induced subgraph; unknown vertices are rejected."""
    ks = frozenset(keep)
    if not ks <= g.vertices:
        raise StructuralError(f"vertices {set(ks - g.vertices)} not in the graph")
    edges = frozenset(e for e in g.edges if e <= ks)
    labels = {v: g.labels[v] for v in ks} if g.labels is not None else None
    return Graph(ks, edges, labels)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def tree_model_to_json(tm: TreeModel) -> dict[str, Any]:
    return {
        "d": tm.sig.d,
        "r": tm.sig.r,
        "signature": [list(t) for t in sorted(tm.sig.entries)],
        "tree": tm.tree.to_nested(),
    }


def tree_model_from_json(obj: Mapping[str, Any], strict: bool = False) -> TreeModel:
    try:
        d = int(obj["d"])
        r = int(obj["r"])
        raw_sig = obj["signature"]
        raw_tree = obj["tree"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"malformed tree-model object: {exc}") from exc
    sig = Signature.make(r, d, [tuple(t) for t in raw_sig], strict=strict)
    tree = LabeledTree.from_nested(r + 1, raw_tree)
    return TreeModel(tree, sig)


def tree_to_json(t: LabeledTree) -> dict[str, Any]:
    return {"p": t.p, "tree": t.to_nested()}


def tree_from_json(obj: Mapping[str, Any]) -> LabeledTree:
    try:
        p = int(obj["p"])
        raw_tree = obj["tree"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"malformed tree object: {exc}") from exc
    return LabeledTree.from_nested(p, raw_tree)


def graph_to_text(g: Graph) -> str:
    """Plain text: first line "n m", then one "u v" line per edge.

    Vertices are renumbered 0..n-1 in sorted id order; an optional final
    "labels: ..." line lists vertex labels in that order.
    """
    order = sorted(g.vertices)
    index = {v: i for i, v in enumerate(order)}
    lines = [f"{g.n} {g.m}"]
    for u, v in sorted((index[a], index[b]) for a, b in g.edge_pairs()):
        lines.append(f"{u} {v}")
    if g.labels is not None:
        lines.append("labels: " + " ".join(str(g.labels[v]) for v in order))
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StructuralError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise StructuralError("first line must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise StructuralError("first line must be 'n m'") from exc
    labels: dict[int, int] | None = None
    body = lines[1:]
    if body and body[-1].startswith("labels:"):
        parts = body[-1].split(":", 1)[1].split()
        if len(parts) != n:
            raise StructuralError(f"labels line has {len(parts)} entries, expected {n}")
        labels = {i: int(x) for i, x in enumerate(parts)}
        body = body[:-1]
    if len(body) != m:
        raise StructuralError(f"expected {m} edge lines, found {len(body)}")
    edges = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise StructuralError(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise StructuralError(f"edge {u} {v} outside vertex range 0..{n - 1}")
        edges.append((u, v))
    return Graph.make(range(n), edges, labels)


def load_structure_file(path: str):
    """Dispatch a file to TreeModel, LabeledTree, or Graph by its content."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        if "signature" in obj:
            return tree_model_from_json(obj)
        if "tree" in obj:
            return tree_from_json(obj)
        raise StructuralError(f"unrecognized JSON object in {path}")
    return graph_from_text(text)
