"""From tree models to graphs: the decoding map and its formula translation.

The graph of a tree model (t, S) lives on the leaves of t: leaves u, v are
adjacent iff (label(u), label(v), l) is in S where the tree distance between
u and v is 2l. Every graph-vocabulary sentence phi has a translation over
the tree vocabulary such that the graph satisfies phi iff the tree satisfies
the translation, at a rank overhead that depends only on d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from itertools import combinations

from .core import Graph, LabeledTree, Signature, TreeModel, require_valid
from .errors import StructuralError
from .logic import (
    And,
    Edge,
    Eq,
    Exists,
    ExistsSet,
    Forall,
    ForallSet,
    Formula,
    Imp,
    Label,
    Member,
    Not,
    Or,
    Root,
    Truth,
    all_var_names,
    and_of,
    free_vars,
    or_of,
    rank,
)


def interpretation_rank(d: int) -> int:
    """Rank overhead 2d+1 of translating through a height-d model.

    Reaching distance exactly 2l needs 2l-1 path quantifiers (at most 2d-1),
    plus one guard quantifier per set binder; 2d+1 covers both with room.
    """
    if d < 0:
        raise StructuralError(f"height must be >= 0, got {d}")
    return 2 * d + 1


def _lca_depth(t: LabeledTree, u: int, v: int) -> int:
    du, dv = t.depth[u], t.depth[v]
    while du > dv:
        u = t.parent[u]  # type: ignore[assignment]
        du -= 1
    while dv > du:
        v = t.parent[v]  # type: ignore[assignment]
        dv -= 1
    while u != v:
        u = t.parent[u]  # type: ignore[assignment]
        v = t.parent[v]  # type: ignore[assignment]
        du -= 1
    return du


def interpret(tm: TreeModel) -> Graph:
    """The graph denoted by a tree model; validates the model first.

    Vertices are the leaf ids with their labels, so restrictions of the tree
    induce literal id-subgraphs.
    """
    require_valid(tm)
    t = tm.tree
    leaves = sorted(t.leaves)
    labels = {v: t.label[v] for v in leaves}
    edges = []
    for u, v in combinations(leaves, 2):
        level = tm.sig.d - _lca_depth(t, u, v)
        if (labels[u], labels[v], level) in tm.sig:
            edges.append((u, v))
    return Graph.make(leaves, edges, labels)


def _check_graph_vocab(f: Formula, r: int) -> None:
    if isinstance(f, Root):
        raise StructuralError("root is not part of the graph vocabulary")
    if isinstance(f, Label) and f.index > r:
        raise StructuralError(f"label index {f.index} exceeds r = {r}")
    for child in _formula_children(f):
        _check_graph_vocab(child, r)


def _formula_children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, Imp):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall, ExistsSet, ForallSet)):
        return (f.body,)
    return ()


def translate_formula(
    f: Formula, sig: Signature, *, rank_budget: int | None = None
) -> Formula:
    """Tree-vocabulary sentence equivalent to f across the interpretation.

    For every valid tree model (t, S) with this signature,
    interpret((t, S)) satisfies f iff t satisfies the result. Point and set
    quantifiers are relativized to leaves (elements with a label in [r]);
    each edge atom expands into a disjunction over signature triples of
    exact-distance path formulas whose quantified vertices are pairwise
    distinct. The output rank is checked against rank(f) + budget.
    """
    q = interpretation_rank(sig.d) if rank_budget is None else rank_budget
    if q < 1:
        raise StructuralError(f"rank budget must be >= 1, got {q}")
    fp, fs = free_vars(f)
    if fp or fs:
        raise StructuralError(
            f"translation requires a sentence; free variables {sorted(fp | fs)}"
        )
    _check_graph_vocab(f, sig.r)
    used = set(all_var_names(f))
    counter = itertools.count(1)

    def fresh(prefix: str = "u") -> str:
        while True:
            name = f"{prefix}{next(counter)}"
            if name not in used:
                used.add(name)
                return name

    def leaf(x: str) -> Formula:
        return or_of(tuple(Label(i, x) for i in range(1, sig.r + 1)))

    def edge_formula(x: str, y: str) -> Formula:
        branches = []
        for i, j, level in sorted(sig.triples()):
            inner = [fresh() for _ in range(2 * level - 1)]
            path = [x] + inner + [y]
            conj: list[Formula] = [Label(i, x), Label(j, y)]
            for a, b in zip(path, path[1:]):
                conj.append(Edge(a, b))
            for ai in range(len(path)):
                for bi in range(ai + 2, len(path)):
                    conj.append(Not(Eq(path[ai], path[bi])))
            body = and_of(tuple(conj))
            for w in reversed(inner):
                body = Exists(w, body)
            branches.append(body)
        return or_of(tuple(branches))

    def go(g: Formula) -> Formula:
        if isinstance(g, (Truth, Eq, Member, Label)):
            return g
        if isinstance(g, Edge):
            return edge_formula(g.left, g.right)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return And(tuple(go(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(go(p) for p in g.parts))
        if isinstance(g, Imp):
            return Imp(go(g.left), go(g.right))
        if isinstance(g, Exists):
            return Exists(g.var, And((leaf(g.var), go(g.body))))
        if isinstance(g, Forall):
            return Forall(g.var, Imp(leaf(g.var), go(g.body)))
        if isinstance(g, ExistsSet):
            w = fresh("w")
            guard = Forall(w, Imp(Member(w, g.var), leaf(w)))
            return ExistsSet(g.var, And((guard, go(g.body))))
        if isinstance(g, ForallSet):
            w = fresh("w")
            guard = Forall(w, Imp(Member(w, g.var), leaf(w)))
            return ForallSet(g.var, Imp(guard, go(g.body)))
        raise TypeError(f"not a formula: {g!r}")

    out = go(f)
    overhead = rank(out) - rank(f)
    if overhead > q:
        raise StructuralError(
            f"rank budget {q} too small: translation overhead is {overhead}"
        )
    return out


@dataclass(frozen=True)
class Interpretation:
    """A signature together with its translation rank budget."""

    sig: Signature
    rank_budget: int

    @classmethod
    def for_signature(
        cls, sig: Signature, rank_budget: int | None = None
    ) -> "Interpretation":
        q = interpretation_rank(sig.d) if rank_budget is None else rank_budget
        if q < 1:
            raise StructuralError(f"rank budget must be >= 1, got {q}")
        return cls(sig, q)

    def apply(self, tm: TreeModel) -> Graph:
        if tm.sig != self.sig:
            raise StructuralError("tree model carries a different signature")
        return interpret(tm)

    def translate(self, f: Formula) -> Formula:
        return translate_formula(f, self.sig, rank_budget=self.rank_budget)
