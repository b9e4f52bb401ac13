"""Deciding rank-m equivalence of finite structures via set-move games.

Two structures agree on every sentence of quantifier rank m iff the
duplicator survives the m-round game in which each round places either a
point pair or a set pair, and the final points form a partial isomorphism
also respecting labels, root, and membership in every placed set pair.

`game_equivalent` is the reference search (memoized, exponential in
structure size). `ef_equivalent` answers through exact closed-form tests at
ranks 0..2 and falls back to the search at higher ranks, where a size guard
applies.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Sequence

from .core import LabeledTree, canonical_encode
from .errors import ResourceLimitError, StructuralError
from .logic import (
    Eq,
    Exists,
    ExistsSet,
    Formula,
    Label,
    Not,
    Root,
    Structure,
    and_of,
    characteristic_formula,
    characteristic_sentence,
)


def _check_vocab(a: Structure, b: Structure) -> None:
    if a.vocabulary != b.vocabulary:
        raise StructuralError(
            f"vocabulary mismatch: {a.vocabulary} vs {b.vocabulary}"
        )


# ---------------------------------------------------------------------------
# Reference game search
# ---------------------------------------------------------------------------


def _game_value(
    a: Structure,
    b: Structure,
    points: tuple[tuple[int, int], ...],
    sets: tuple[tuple[int, int], ...],
    k: int,
) -> bool:
    """Does the duplicator win from this position with k rounds left?

    Points are (element of a, element of b) pairs; sets are bitmask pairs
    over the sorted universes. The position is assumed consistent.
    """
    ia = {v: i for i, v in enumerate(a.universe)}
    ib = {v: i for i, v in enumerate(b.universe)}
    na, nb = len(a.universe), len(b.universe)
    memo: dict[tuple, bool] = {}

    def point_ok(va, vb, pts, sts) -> bool:
        if a.ptype(va) != b.ptype(vb):
            return False
        for ua, ub in pts:
            if (ua == va) != (ub == vb):
                return False
            if a.has_edge(ua, va) != b.has_edge(ub, vb):
                return False
        for ma, mb in sts:
            if (ma >> ia[va] & 1) != (mb >> ib[vb] & 1):
                return False
        return True

    def set_ok(ma, mb, pts) -> bool:
        for ua, ub in pts:
            if (ma >> ia[ua] & 1) != (mb >> ib[ub] & 1):
                return False
        return True

    def win(pts, sts, rounds) -> bool:
        if rounds == 0:
            return True
        key = (pts, sts, rounds)
        got = memo.get(key)
        if got is not None:
            return got
        out = True
        for va in a.universe:
            if not any(
                win(tuple(sorted(pts + ((va, vb),))), sts, rounds - 1)
                for vb in b.universe
                if point_ok(va, vb, pts, sts)
            ):
                out = False
                break
        if out:
            for vb in b.universe:
                if not any(
                    win(tuple(sorted(pts + ((va, vb),))), sts, rounds - 1)
                    for va in a.universe
                    if point_ok(va, vb, pts, sts)
                ):
                    out = False
                    break
        if out:
            for ma in range(1 << na):
                if not any(
                    win(pts, tuple(sorted(sts + ((ma, mb),))), rounds - 1)
                    for mb in range(1 << nb)
                    if set_ok(ma, mb, pts)
                ):
                    out = False
                    break
        if out:
            for mb in range(1 << nb):
                if not any(
                    win(pts, tuple(sorted(sts + ((ma, mb),))), rounds - 1)
                    for ma in range(1 << na)
                    if set_ok(ma, mb, pts)
                ):
                    out = False
                    break
        memo[key] = out
        return out

    return win(tuple(sorted(points)), tuple(sorted(sets)), k)


def game_equivalent(a: Structure, b: Structure, m: int) -> bool:
    """Reference decision by exhaustive game search. Exponential; use only
    on small structures or through `ef_equivalent`."""
    _check_vocab(a, b)
    if m <= 0:
        return True
    return _game_value(a, b, (), (), m)


# ---------------------------------------------------------------------------
# Exact closed-form tests at low rank
# ---------------------------------------------------------------------------


def _rank1_equal(a: Structure, b: Structure) -> bool:
    # One round: only the realized unary point types matter; any set move
    # can be answered arbitrarily since no points are ever placed.
    return a.realized_ptypes == b.realized_ptypes


def _w1_types(s: Structure) -> dict[int, tuple]:
    """Rank-1 type of the pointed structure (s, v), in closed form.

    (s, v) and (s', v') are 1-round equivalent iff v and v' have the same
    unary type and the same realized set of (ptype(x), x = v, x adjacent v)
    descriptors.
    """
    out: dict[int, tuple] = {}
    for v in s.universe:
        adj = s.adjacency[v]
        desc = frozenset((s.ptype(x), x == v, x in adj) for x in s.universe)
        out[v] = (s.ptype(v), desc)
    return out


def _rank2_equal(a: Structure, b: Structure) -> bool:
    # Point round first: every pointed type realized on one side must be
    # realized on the other. Set round first: for each unary type, whether
    # a class is empty / a singleton / larger must agree (a spoiler set can
    # split a class only if it has at least 2 elements). The set condition
    # is implied by the point condition but is cheap, so both are checked.
    if set(_w1_types(a).values()) != set(_w1_types(b).values()):
        return False
    ca = Counter(a.ptype(v) for v in a.universe)
    cb = Counter(b.ptype(v) for v in b.universe)
    for t in set(ca) | set(cb):
        if min(ca[t], 2) != min(cb[t], 2):
            return False
    return True


def ef_equivalent(
    a: Structure, b: Structure, m: int, *, size_limit: int = 14
) -> bool:
    """Decide whether a and b satisfy the same sentences of rank <= m.

    Ranks 0..2 are decided by exact polynomial tests; higher ranks run the
    game search, which refuses structures larger than size_limit.
    """
    _check_vocab(a, b)
    if m <= 0:
        return True
    if m == 1:
        return _rank1_equal(a, b)
    if m == 2:
        return _rank2_equal(a, b)
    biggest = max(len(a.universe), len(b.universe))
    if biggest > size_limit:
        raise ResourceLimitError(
            f"rank-{m} game on structures of size {len(a.universe)} and "
            f"{len(b.universe)} exceeds the size limit {size_limit}"
        )
    return _game_value(a, b, (), (), m)


# ---------------------------------------------------------------------------
# Distinguishing sentences
# ---------------------------------------------------------------------------


def _ptype_description(s: Structure, ptype: tuple, var: str) -> Formula:
    lab, is_root = ptype
    parts: list[Formula] = []
    if s.num_labels >= 1 and lab is not None:
        parts.append(Label(lab, var))
    if s.root is not None:
        parts.append(Root(var) if is_root else Not(Root(var)))
    return and_of(tuple(parts))


def _mask_to_set(mask: int, universe: tuple[int, ...]) -> frozenset[int]:
    return frozenset(v for i, v in enumerate(universe) if mask >> i & 1)


def distinguish(
    a: Structure,
    b: Structure,
    m: int,
    *,
    budget: int = 10_000_000,
    size_limit: int = 14,
) -> Formula | None:
    """A rank <= m sentence true on a and false on b, or None if equivalent.

    The witness follows a winning first move of the spoiler: one quantifier
    over the rank-(m-1) description of the moved-on structure, negated when
    the move was on b. Low ranks use the closed-form tests directly.
    """
    if ef_equivalent(a, b, m, size_limit=size_limit):
        return None
    if m == 1:
        ra, rb = a.realized_ptypes, b.realized_ptypes
        only_a = sorted(ra - rb, key=repr)
        if only_a:
            body = _ptype_description(a, only_a[0], "x1")
            return Exists("x1", body)
        only_b = sorted(rb - ra, key=repr)
        body = _ptype_description(b, only_b[0], "x1")
        return Not(Exists("x1", body))
    if m == 2:
        ta, tb = _w1_types(a), _w1_types(b)
        realized_b = set(tb.values())
        for v in a.universe:
            if ta[v] not in realized_b:
                chi = characteristic_formula(a, 1, points=(v,), budget=budget)
                return Exists("x1", chi)
        realized_a = set(ta.values())
        for v in b.universe:
            if tb[v] not in realized_a:
                chi = characteristic_formula(b, 1, points=(v,), budget=budget)
                return Not(Exists("x1", chi))
        ca = Counter(a.ptype(v) for v in a.universe)
        cb = Counter(b.ptype(v) for v in b.universe)
        for t in sorted(set(ca) | set(cb), key=repr):
            if min(ca[t], 2) != min(cb[t], 2):
                pair = And(
                    (
                        Not(Eq("x1", "x2")),
                        _ptype_description(a, t, "x1"),
                        _ptype_description(a, t, "x2"),
                    )
                )
                two = Exists("x1", Exists("x2", pair))
                return two if ca[t] >= 2 else Not(two)
        return characteristic_sentence(a, m, budget=budget)
    # m >= 3: search the game for a winning first move of the spoiler.
    for va in a.universe:
        if not any(
            a.ptype(va) == b.ptype(vb) and _game_value(a, b, ((va, vb),), (), m - 1)
            for vb in b.universe
        ):
            chi = characteristic_formula(a, m - 1, points=(va,), budget=budget)
            return Exists("x1", chi)
    for vb in b.universe:
        if not any(
            a.ptype(va) == b.ptype(vb) and _game_value(a, b, ((va, vb),), (), m - 1)
            for va in a.universe
        ):
            chi = characteristic_formula(b, m - 1, points=(vb,), budget=budget)
            return Not(Exists("x1", chi))
    na, nb = len(a.universe), len(b.universe)
    for ma in range(1 << na):
        if not any(
            _game_value(a, b, (), ((ma, mb),), m - 1) for mb in range(1 << nb)
        ):
            ss = _mask_to_set(ma, a.universe)
            chi = characteristic_formula(a, m - 1, sets=(ss,), budget=budget)
            return ExistsSet("X1", chi)
    for mb in range(1 << nb):
        if not any(
            _game_value(a, b, (), ((ma, mb),), m - 1) for ma in range(1 << na)
        ):
            ss = _mask_to_set(mb, b.universe)
            chi = characteristic_formula(b, m - 1, sets=(ss,), budget=budget)
            return Not(ExistsSet("X1", chi))
    # Unreachable when the structures are inequivalent.
    return characteristic_sentence(a, m, budget=budget)


# ---------------------------------------------------------------------------
# Canonical keys and type partitions
# ---------------------------------------------------------------------------


def _pkey(s: Structure, v: int) -> tuple[int, int]:
    lab, is_root = s.ptype(v)
    return (0 if lab is None else lab, 1 if is_root else 0)


def _graph_canonical_code(s: Structure, perm_budget: int = 50_000) -> tuple | None:
    """Smallest encoding over vertex orderings compatible with refined
    colors, or None when the ordering space exceeds the budget."""
    colors: dict[int, tuple] = {v: _pkey(s, v) for v in s.universe}
    while True:
        refined = {
            v: (colors[v], tuple(sorted(colors[u] for u in s.adjacency[v])))
            for v in s.universe
        }
        if len(set(refined.values())) == len(set(colors.values())):
            break
        colors = refined
    classes: dict[tuple, list[int]] = {}
    for v in s.universe:
        classes.setdefault(colors[v], []).append(v)
    total = 1
    for members in classes.values():
        for i in range(2, len(members) + 1):
            total *= i
        if total > perm_budget:
            return None
    ordered_classes = [classes[c] for c in sorted(classes)]

    def orderings(idx: int, prefix: list[int]):
        if idx == len(ordered_classes):
            yield tuple(prefix)
            return
        for perm in permutations(sorted(ordered_classes[idx])):
            yield from orderings(idx + 1, prefix + list(perm))

    best: tuple | None = None
    for order in orderings(0, []):
        pos = {v: i for i, v in enumerate(order)}
        enc = (
            tuple(_pkey(s, v) for v in order),
            tuple(
                sorted(
                    tuple(sorted((pos[u], pos[v]))) for u, v in map(tuple, s.edges)
                )
            ),
        )
        if best is None or enc < best:
            best = enc
    return best


def canonical_structure_key(s: Structure) -> tuple:
    """Deterministic bucketing key; equal keys imply isomorphic structures.

    Tree-backed structures use the tree code. Graphs use exhaustive
    canonicalization when small enough; beyond that the key falls back to
    the literal presentation, which is still deterministic but no longer
    identifies isomorphic copies (they are merged later by the oracle).
    """
    if isinstance(s.source, LabeledTree):
        return ("tree", canonical_encode(s.source))
    code = _graph_canonical_code(s)
    if code is not None:
        return ("graph", code)
    order = sorted(s.universe)
    pos = {v: i for i, v in enumerate(order)}
    edges = tuple(
        sorted(tuple(sorted((pos[u], pos[v]))) for u, v in map(tuple, s.edges))
    )
    return ("raw", tuple(_pkey(s, v) for v in order), edges)


@dataclass(frozen=True)
class TypePartition:
    """Partition of a structure sequence into rank-m equivalence classes.

    Class ids are assigned by ascending smallest canonical key, so they are
    stable across runs for the same inputs.
    """

    m: int
    class_of: tuple[int, ...]
    num_classes: int
    class_keys: tuple

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for i, c in enumerate(self.class_of):
            out[c].append(i)
        return out

    def counts(self) -> list[int]:
        out = [0] * self.num_classes
        for c in self.class_of:
            out[c] += 1
        return out


def type_partition(
    structures: Sequence[Structure], m: int, *, size_limit: int = 14
) -> TypePartition:
    """Group structures by rank-m equivalence.

    Structures with equal canonical keys are merged without running the
    oracle; one representative per key is compared pairwise.
    """
    n = len(structures)
    if n == 0:
        return TypePartition(m, (), 0, ())
    for s in structures[1:]:
        _check_vocab(structures[0], s)
    keys = [canonical_structure_key(s) for s in structures]
    buckets: dict[tuple, list[int]] = {}
    for i, k in enumerate(keys):
        buckets.setdefault(k, []).append(i)
    reps = [members[0] for _, members in sorted(buckets.items())]
    parent = {r: r for r in reps}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in combinations(reps, 2):
        if find(i) == find(j):
            continue
        try:
            same = ef_equivalent(structures[i], structures[j], m, size_limit=size_limit)
        except ResourceLimitError as exc:
            raise ResourceLimitError(
                f"type partition blocked on structures {i} and {j}: {exc}"
            ) from exc
        if same:
            parent[find(i)] = find(j)
    bucket_rep = {k: members[0] for k, members in buckets.items()}
    rep_of = {i: find(bucket_rep[keys[i]]) for i in range(n)}
    roots = sorted(set(rep_of.values()))
    class_key = {
        root: min(keys[i] for i in range(n) if rep_of[i] == root) for root in roots
    }
    ordered_roots = sorted(roots, key=lambda r: class_key[r])
    class_id = {root: idx for idx, root in enumerate(ordered_roots)}
    class_of = tuple(class_id[rep_of[i]] for i in range(n))
    return TypePartition(
        m, class_of, len(ordered_roots), tuple(class_key[r] for r in ordered_roots)
    )
