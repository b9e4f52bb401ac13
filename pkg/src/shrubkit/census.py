"""Counting and searching the tree-model universe.

enumerate_trees streams one representative per isomorphism class of labeled
rooted trees, ascending by size then canonical code, so enlarging the size
budget extends the stream rather than reordering it. index_lower_bound
counts rank-m classes realized within a height/label/size budget.
recognize searches for a tree model denoting a given graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterator

from .core import Graph, LabeledTree, Signature, TreeModel, validate_tree_model
from .errors import StructuralError
from .ef import type_partition
from .interp import interpret
from .logic import Structure

CanonicalCode = tuple


def _codes_exact(d: int, size: int, p: int, memo: dict) -> list[CanonicalCode]:
    """Canonical codes of height <= d, exactly `size` nodes, labels in [p]."""
    key = (d, size)
    got = memo.get(key)
    if got is not None:
        return got
    out: list[CanonicalCode] = []
    if size == 1:
        out = [(lab, ()) for lab in range(1, p + 1)]
    elif d >= 1:
        pool: list[CanonicalCode] = []
        for s in range(1, size):
            pool.extend(_codes_exact(d - 1, s, p, memo))
        pool.sort(key=lambda c: (_code_size(c), c))
        sizes = [_code_size(c) for c in pool]

        def choose(start: int, remaining: int, acc: list[CanonicalCode]) -> None:
            if remaining == 0:
                if acc:
                    for lab in range(1, p + 1):
                        out.append((lab, tuple(acc)))
                return
            for idx in range(start, len(pool)):
                if sizes[idx] <= remaining:
                    acc.append(pool[idx])
                    choose(idx, remaining - sizes[idx], acc)
                    acc.pop()

        choose(0, size - 1, [])
    out = sorted(set(out))
    memo[key] = out
    return out


def _code_size(code: CanonicalCode) -> int:
    return 1 + sum(_code_size(c) for c in code[1])


def _tree_from_code(code: CanonicalCode, p: int) -> LabeledTree:
    parent: dict[int, int | None] = {}
    label: dict[int, int] = {}
    counter = 0

    def build(c: CanonicalCode, par: int | None) -> None:
        nonlocal counter
        vid = counter
        counter += 1
        parent[vid] = par
        label[vid] = c[0]
        for child in c[1]:
            build(child, vid)

    build(code, None)
    return LabeledTree(p, 0, parent, label)


def enumerate_trees(d: int, p: int, max_nodes: int) -> Iterator[LabeledTree]:
    """One tree per isomorphism class: height <= d, labels in [p], size <=
    max_nodes, ascending by (size, canonical code)."""
    if d < 0 or p < 1 or max_nodes < 0:
        raise StructuralError("enumerate_trees needs d >= 0, p >= 1, max_nodes >= 0")
    memo: dict = {}
    for size in range(1, max_nodes + 1):
        for code in _codes_exact(d, size, p, memo):
            yield _tree_from_code(code, p)


def index_lower_bound(d: int, p: int, m: int, max_nodes: int) -> int:
    """Number of rank-m classes realized by trees of height <= d with labels
    in [p] and at most max_nodes nodes."""
    structures = [Structure.from_tree(t) for t in enumerate_trees(d, p, max_nodes)]
    if not structures:
        return 0
    return type_partition(structures, m).num_classes


# ---------------------------------------------------------------------------
# Recognition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecognitionResult:
    status: str  # "found" | "no" | "unknown"
    model: TreeModel | None
    work: int


def _shapes(d: int, n: int, memo: dict) -> list[tuple]:
    """Uniform-depth tree shapes: every leaf at depth exactly d, n leaves.

    A shape is () for a leaf and a sorted tuple of child shapes otherwise.
    """
    key = (d, n)
    got = memo.get(key)
    if got is not None:
        return got
    if d == 0:
        out = [()] if n == 1 else []
    else:
        sub = {}
        for k in range(1, n + 1):
            sub[k] = _shapes(d - 1, k, memo)
        out_set: set[tuple] = set()

        def choose(remaining: int, acc: list[tuple]) -> None:
            if remaining == 0:
                if acc:
                    out_set.add(tuple(sorted(acc)))
                return
            for k in range(1, remaining + 1):
                for child in sub[k]:
                    acc.append(child)
                    choose(remaining - k, acc)
                    acc.pop()

        choose(n, [])
        out = sorted(out_set)
    memo[key] = out
    return out


def _shape_leaf_levels(shape: tuple) -> tuple[list[int], dict[tuple[int, int], int]]:
    """Leaf slots in traversal order plus, for each slot pair, the l value
    (half the tree distance) determined by the shape."""
    paths: list[tuple[int, ...]] = []

    def walk(s: tuple, prefix: tuple[int, ...]) -> None:
        if not s:
            paths.append(prefix)
            return
        for i, child in enumerate(s):
            walk(child, prefix + (i,))

    walk(shape, ())
    depth = len(paths[0]) if paths else 0
    levels: dict[tuple[int, int], int] = {}
    for a in range(len(paths)):
        for b in range(a + 1, len(paths)):
            common = 0
            for x, y in zip(paths[a], paths[b]):
                if x != y:
                    break
                common += 1
            levels[(a, b)] = depth - common
    return list(range(len(paths))), levels


def _canonical_labelings(n: int, r: int) -> Iterator[tuple[int, ...]]:
    """Label tuples where label values appear in first-use order, pruning
    global relabelings of the same solution."""

    def go(i: int, used: int, acc: list[int]) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(acc)
            return
        top = min(used + 1, r)
        for lab in range(1, top + 1):
            acc.append(lab)
            yield from go(i + 1, max(used, lab), acc)
            acc.pop()

    yield from go(0, 0, [])


def _model_from_assignment(
    shape: tuple, d: int, r: int, vertex_order: tuple[int, ...], labels: tuple[int, ...],
    triples: set[tuple[int, int, int]],
) -> TreeModel:
    """Build the tree model realizing this shape/assignment; leaves take the
    graph's vertex ids."""
    next_internal = max(vertex_order) + 1 if vertex_order else 0
    parent: dict[int, int | None] = {}
    label_map: dict[int, int] = {}
    slot = 0

    def build(s: tuple, par: int | None) -> None:
        nonlocal next_internal, slot
        if not s:
            vid = vertex_order[slot]
            parent[vid] = par
            label_map[vid] = labels[slot]
            slot += 1
            return
        vid = next_internal
        next_internal += 1
        parent[vid] = par
        label_map[vid] = r + 1
        for child in s:
            build(child, vid)

    build(shape, None)
    root = vertex_order[0] if not shape else min(
        v for v, par in parent.items() if par is None
    )
    tree = LabeledTree(r + 1, root, parent, label_map)
    sig = Signature.make(r, d, triples)
    return TreeModel(tree, sig)


def recognize(g: Graph, r: int, d: int, budget: int = 200_000) -> RecognitionResult:
    """Search for a tree model with parameters (r, d) denoting g.

    Enumerates leaf shapes, vertex assignments, and leaf labelings (up to
    global relabeling); the signature, if any, is forced by consistency of
    the required edge verdicts. Work is counted per candidate checked;
    running out of budget yields "unknown".
    """
    if r < 1 or d < 0:
        raise StructuralError("recognize needs r >= 1 and d >= 0")
    n = g.n
    work = 0
    if n == 0:
        return RecognitionResult("no", None, 0)
    vertices = tuple(sorted(g.vertices))
    memo: dict = {}
    for shape in _shapes(d, n, memo):
        slots, levels = _shape_leaf_levels(shape)
        for perm in permutations(vertices):
            for labels in _canonical_labelings(n, r):
                work += 1
                if work > budget:
                    return RecognitionResult("unknown", None, work)
                required: dict[tuple[int, int, int], bool] = {}
                consistent = True
                for (a, b), level in levels.items():
                    la, lb = labels[a], labels[b]
                    key = (min(la, lb), max(la, lb), level)
                    has = g.has_edge(perm[a], perm[b])
                    prev = required.get(key)
                    if prev is None:
                        required[key] = has
                    elif prev != has:
                        consistent = False
                        break
                if not consistent:
                    continue
                triples = {k for k, v in required.items() if v}
                model = _model_from_assignment(shape, d, r, perm, labels, triples)
                if not validate_tree_model(model).ok:
                    continue
                out = interpret(model)
                # Recognition is about the underlying {E}-graph; the model's
                # leaf labels are its own choice, so ignore input labels.
                if out.vertices == g.vertices and out.edges == g.edges:
                    return RecognitionResult("found", model, work)
    return RecognitionResult("no", None, work)
