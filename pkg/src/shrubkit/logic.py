"""Monadic second-order formulas: syntax, evaluation, characteristic sentences.

Surface syntax is s-expressions:

    form := (true) | (false)
          | (= x y) | (E x y) | (P i x) | (root x) | (in x X)
          | (not f) | (and f ...) | (or f ...) | (imp f g)
          | (exists x f) | (forall x f) | (existsS X f) | (forallS X f)

Point variables start lowercase, set variables uppercase. Quantifier rank
counts nesting depth of point and set quantifiers alike.

Structures are finite: a universe, a symmetric edge relation, optional unary
labels partitioning the universe, and an optional root constant. Both graphs
and rooted trees are viewed through the same `Structure` class.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Mapping

from .core import Graph, LabeledTree
from .errors import (
    FormulaSyntaxError,
    ResourceLimitError,
    StructuralError,
    UnboundVariableError,
)

# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


class Formula:
    """Base class; concrete nodes are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Edge(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Label(Formula):
    index: int
    var: str


@dataclass(frozen=True)
class Root(Formula):
    var: str


@dataclass(frozen=True)
class Member(Formula):
    var: str
    set_var: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsSet(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ForallSet(Formula):
    var: str
    body: Formula


TRUE = Truth(True)
FALSE = Truth(False)

_POINT_VAR = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_SET_VAR = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


def and_of(parts: tuple[Formula, ...]) -> Formula:
    """n-ary conjunction collapsing the 0- and 1-part cases."""
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def or_of(parts: tuple[Formula, ...]) -> Formula:
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, Imp):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall, ExistsSet, ForallSet)):
        return (f.body,)
    return ()


def rank(f: Formula) -> int:
    """Quantifier rank; point and set quantifiers both count."""
    memo: dict[int, int] = {}

    def go(g: Formula) -> int:
        key = id(g)
        if key in memo:
            return memo[key]
        kids = _children(g)
        sub = max((go(k) for k in kids), default=0)
        out = sub + 1 if isinstance(g, (Exists, Forall, ExistsSet, ForallSet)) else sub
        memo[key] = out
        return out

    return go(f)


def free_vars(f: Formula) -> tuple[frozenset[str], frozenset[str]]:
    """(free point variables, free set variables)."""
    memo: dict[int, tuple[frozenset[str], frozenset[str]]] = {}

    def go(g: Formula) -> tuple[frozenset[str], frozenset[str]]:
        key = id(g)
        if key in memo:
            return memo[key]
        pts: frozenset[str] = frozenset()
        sts: frozenset[str] = frozenset()
        if isinstance(g, (Eq, Edge)):
            pts = frozenset((g.left, g.right))
        elif isinstance(g, Label):
            pts = frozenset((g.var,))
        elif isinstance(g, Root):
            pts = frozenset((g.var,))
        elif isinstance(g, Member):
            pts = frozenset((g.var,))
            sts = frozenset((g.set_var,))
        else:
            for k in _children(g):
                kp, ks = go(k)
                pts |= kp
                sts |= ks
            if isinstance(g, (Exists, Forall)):
                pts -= {g.var}
            elif isinstance(g, (ExistsSet, ForallSet)):
                sts -= {g.var}
        memo[key] = (pts, sts)
        return (pts, sts)

    return go(f)


def is_closed(f: Formula) -> bool:
    pts, sts = free_vars(f)
    return not pts and not sts


def all_var_names(f: Formula) -> frozenset[str]:
    """Every variable name occurring in f, bound or free."""
    out: set[str] = set()
    seen: set[int] = set()

    def go(g: Formula) -> None:
        if id(g) in seen:
            return
        seen.add(id(g))
        if isinstance(g, (Eq, Edge)):
            out.update((g.left, g.right))
        elif isinstance(g, (Label, Root)):
            out.add(g.var)
        elif isinstance(g, Member):
            out.update((g.var, g.set_var))
        elif isinstance(g, (Exists, Forall, ExistsSet, ForallSet)):
            out.add(g.var)
        for k in _children(g):
            go(k)

    go(f)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Parsing and printing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    out: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch in "()":
            out.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            start, start_col = i, col
            while i < len(text) and not text[i].isspace() and text[i] not in "()":
                i += 1
                col += 1
            out.append(_Token(text[start:i], line, start_col))
    return out


def _point_var(tok: _Token) -> str:
    if not _POINT_VAR.match(tok.text):
        raise FormulaSyntaxError(
            f"expected point variable, got {tok.text!r}", tok.line, tok.column
        )
    return tok.text


def _set_var(tok: _Token) -> str:
    if not _SET_VAR.match(tok.text):
        raise FormulaSyntaxError(
            f"expected set variable, got {tok.text!r}", tok.line, tok.column
        )
    return tok.text


def parse_formula(text: str) -> Formula:
    """Parse a closed formula; rejects syntax errors and unbound variables."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty input", 1, 1)
    pos = 0

    def peek() -> _Token:
        if pos >= len(tokens):
            last = tokens[-1]
            raise FormulaSyntaxError("unexpected end of input", last.line, last.column)
        return tokens[pos]

    def take() -> _Token:
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expect(text_: str) -> _Token:
        tok = take()
        if tok.text != text_:
            raise FormulaSyntaxError(
                f"expected {text_!r}, got {tok.text!r}", tok.line, tok.column
            )
        return tok

    def form() -> Formula:
        expect("(")
        head = take()
        h = head.text
        if h == "true":
            expect(")")
            return TRUE
        if h == "false":
            expect(")")
            return FALSE
        if h == "=":
            a, b = _point_var(take()), _point_var(take())
            expect(")")
            return Eq(a, b)
        if h == "E":
            a, b = _point_var(take()), _point_var(take())
            expect(")")
            return Edge(a, b)
        if h == "P":
            itok = take()
            try:
                idx = int(itok.text)
            except ValueError:
                raise FormulaSyntaxError(
                    f"expected label index, got {itok.text!r}", itok.line, itok.column
                ) from None
            if idx < 1:
                raise FormulaSyntaxError(
                    f"label index must be >= 1, got {idx}", itok.line, itok.column
                )
            v = _point_var(take())
            expect(")")
            return Label(idx, v)
        if h == "root":
            v = _point_var(take())
            expect(")")
            return Root(v)
        if h == "in":
            v = _point_var(take())
            s = _set_var(take())
            expect(")")
            return Member(v, s)
        if h == "not":
            body = form()
            expect(")")
            return Not(body)
        if h in ("and", "or"):
            parts = [form()]
            while peek().text != ")":
                parts.append(form())
            expect(")")
            return And(tuple(parts)) if h == "and" else Or(tuple(parts))
        if h == "imp":
            left, right = form(), form()
            expect(")")
            return Imp(left, right)
        if h in ("exists", "forall"):
            v = _point_var(take())
            body = form()
            expect(")")
            return Exists(v, body) if h == "exists" else Forall(v, body)
        if h in ("existsS", "forallS"):
            v = _set_var(take())
            body = form()
            expect(")")
            return ExistsSet(v, body) if h == "existsS" else ForallSet(v, body)
        raise FormulaSyntaxError(f"unknown form {h!r}", head.line, head.column)

    out = form()
    if pos != len(tokens):
        extra = tokens[pos]
        raise FormulaSyntaxError(
            f"trailing input {extra.text!r}", extra.line, extra.column
        )
    _check_bound(out)
    return out


def _check_bound(f: Formula) -> None:
    def go(g: Formula, pts: frozenset[str], sts: frozenset[str]) -> None:
        if isinstance(g, (Eq, Edge)):
            for v in (g.left, g.right):
                if v not in pts:
                    raise UnboundVariableError(v)
        elif isinstance(g, (Label, Root)):
            if g.var not in pts:
                raise UnboundVariableError(g.var)
        elif isinstance(g, Member):
            if g.var not in pts:
                raise UnboundVariableError(g.var)
            if g.set_var not in sts:
                raise UnboundVariableError(g.set_var)
        elif isinstance(g, (Exists, Forall)):
            go(g.body, pts | {g.var}, sts)
        elif isinstance(g, (ExistsSet, ForallSet)):
            go(g.body, pts, sts | {g.var})
        else:
            for k in _children(g):
                go(k, pts, sts)

    go(f, frozenset(), frozenset())


def format_formula(f: Formula) -> str:
    """Canonical s-expression text; round-trips through parse_formula."""
    if isinstance(f, Truth):
        return "(true)" if f.value else "(false)"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Edge):
        return f"(E {f.left} {f.right})"
    if isinstance(f, Label):
        return f"(P {f.index} {f.var})"
    if isinstance(f, Root):
        return f"(root {f.var})"
    if isinstance(f, Member):
        return f"(in {f.var} {f.set_var})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.body)})"
    if isinstance(f, And):
        if not f.parts:
            return "(true)"
        return "(and " + " ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        if not f.parts:
            return "(false)"
        return "(or " + " ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, Imp):
        return f"(imp {format_formula(f.left)} {format_formula(f.right)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {format_formula(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {format_formula(f.body)})"
    if isinstance(f, ExistsSet):
        return f"(existsS {f.var} {format_formula(f.body)})"
    if isinstance(f, ForallSet):
        return f"(forallS {f.var} {format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    """What atoms are available: P_1..P_num_labels, and optionally root."""

    num_labels: int = 0
    has_root: bool = False


@dataclass(frozen=True, eq=False)
class Structure:
    """Finite structure over {E} plus optional unary labels and a root."""

    universe: tuple[int, ...]
    edges: frozenset[frozenset[int]]
    label_of: Mapping[int, int] | None
    num_labels: int
    root: int | None
    source: Any = field(default=None, repr=False)

    @classmethod
    def from_tree(cls, t: LabeledTree) -> "Structure":
        edges = frozenset(
            frozenset((v, t.parent[v])) for v in t.node_ids if t.parent[v] is not None
        )
        return cls(
            universe=tuple(sorted(t.node_ids)),
            edges=edges,
            label_of=dict(t.label),
            num_labels=t.p,
            root=t.root,
            source=t,
        )

    @classmethod
    def from_graph(cls, g: Graph, num_labels: int | None = None) -> "Structure":
        labels = dict(g.labels) if g.labels is not None else None
        if num_labels is None:
            num_labels = max(labels.values(), default=0) if labels else 0
        return cls(
            universe=tuple(sorted(g.vertices)),
            edges=g.edges,
            label_of=labels,
            num_labels=num_labels,
            root=None,
            source=g,
        )

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(self.num_labels, self.root is not None)

    @property
    def size(self) -> int:
        return len(self.universe)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        out: dict[int, set[int]] = {v: set() for v in self.universe}
        for e in self.edges:
            u, v = tuple(e)
            out[u].add(v)
            out[v].add(u)
        return {v: frozenset(s) for v, s in out.items()}

    def ptype(self, v: int) -> tuple[int | None, bool]:
        """Unary point type: (label, is-root)."""
        lab = self.label_of.get(v) if self.label_of is not None else None
        return (lab, v == self.root)

    @cached_property
    def realized_ptypes(self) -> frozenset[tuple[int | None, bool]]:
        return frozenset(self.ptype(v) for v in self.universe)

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and frozenset((u, v)) in self.edges


def subsets_in_order(elems: tuple[int, ...]) -> Iterator[frozenset[int]]:
    """All subsets, by increasing size then lexicographic within a size."""
    for k in range(len(elems) + 1):
        for combo in itertools.combinations(elems, k):
            yield frozenset(combo)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

Env = Mapping[str, Any]


def evaluate(struct: Structure, f: Formula, env: Env | None = None) -> bool:
    """Model check by brute-force recursion.

    Point quantifiers range over the universe in sorted order; set
    quantifiers enumerate subsets by increasing size then lexicographically,
    so the first counterexample found is deterministic. Subformula results
    are memoized on the bindings of their own free variables.

    A set quantifier immediately constrained by a guard
    `(forall w (imp (in w X) psi))` only enumerates subsets of
    {a : psi(a)}, which keeps quantification over definable sub-universes
    (leaf sets, in particular) tractable.
    """
    base: dict[str, Any] = dict(env) if env else {}
    fp, fs = free_vars(f)
    missing = (fp | fs) - set(base)
    if missing:
        raise StructuralError(f"unbound variables in evaluation: {sorted(missing)}")
    uni = struct.universe
    uniset = set(uni)
    for name in fp:
        if base[name] not in uniset:
            raise StructuralError(f"binding for {name} is outside the universe")
    for name in fs:
        val = base[name]
        if not isinstance(val, frozenset):
            base[name] = val = frozenset(val)
        if not val <= uniset:
            raise StructuralError(f"binding for {name} is not a subset of the universe")

    fv_memo: dict[int, tuple[frozenset[str], frozenset[str]]] = {}

    def fv(g: Formula) -> tuple[frozenset[str], frozenset[str]]:
        key = id(g)
        got = fv_memo.get(key)
        if got is None:
            got = free_vars(g)
            fv_memo[key] = got
        return got

    memo: dict[tuple, bool] = {}
    env_d: dict[str, Any] = base

    def project(g: Formula) -> tuple:
        gp, gs = fv(g)
        return (
            tuple(sorted((n, env_d[n]) for n in gp)),
            tuple(sorted((n, tuple(sorted(env_d[n]))) for n in gs)),
        )

    _MISSING = object()

    def guard_domain(psi: Formula, w: str) -> tuple[int, ...]:
        old = env_d.get(w, _MISSING)
        out = []
        for a in uni:
            env_d[w] = a
            if go(psi):
                out.append(a)
        if old is _MISSING:
            env_d.pop(w, None)
        else:
            env_d[w] = old
        return tuple(out)

    def go(g: Formula) -> bool:
        if isinstance(g, Truth):
            return g.value
        if isinstance(g, Eq):
            return env_d[g.left] == env_d[g.right]
        if isinstance(g, Edge):
            return struct.has_edge(env_d[g.left], env_d[g.right])
        if isinstance(g, Label):
            lab = struct.label_of
            return lab is not None and lab.get(env_d[g.var]) == g.index
        if isinstance(g, Root):
            return struct.root is not None and env_d[g.var] == struct.root
        if isinstance(g, Member):
            return env_d[g.var] in env_d[g.set_var]
        key = (id(g), project(g))
        got = memo.get(key)
        if got is not None:
            return got
        out = _eval_compound(g)
        memo[key] = out
        return out

    def _eval_compound(g: Formula) -> bool:
        if isinstance(g, Not):
            return not go(g.body)
        if isinstance(g, And):
            return all(go(p) for p in g.parts)
        if isinstance(g, Or):
            return any(go(p) for p in g.parts)
        if isinstance(g, Imp):
            return (not go(g.left)) or go(g.right)
        if isinstance(g, (Exists, Forall)):
            want = isinstance(g, Exists)
            old = env_d.get(g.var, _MISSING)
            result = not want
            for a in uni:
                env_d[g.var] = a
                if go(g.body) == want:
                    result = want
                    break
            if old is _MISSING:
                env_d.pop(g.var, None)
            else:
                env_d[g.var] = old
            return result
        if isinstance(g, (ExistsSet, ForallSet)):
            want = isinstance(g, ExistsSet)
            split = _guard_split(g)
            if split is not None:
                psi, w, rest = split
                domain = guard_domain(psi, w)
                body: Formula = rest
            else:
                domain = uni
                body = g.body
            old = env_d.get(g.var, _MISSING)
            result = not want
            for s in subsets_in_order(domain):
                env_d[g.var] = s
                if go(body) == want:
                    result = want
                    break
            if old is _MISSING:
                env_d.pop(g.var, None)
            else:
                env_d[g.var] = old
            return result
        raise TypeError(f"not a formula: {g!r}")

    def _guard_split(g: Formula) -> tuple[Formula, str, Formula] | None:
        if isinstance(g, ExistsSet) and isinstance(g.body, And):
            for idx, part in enumerate(g.body.parts):
                m = _match_guard(part, g.var)
                if m is not None:
                    rest = g.body.parts[:idx] + g.body.parts[idx + 1 :]
                    return m[0], m[1], and_of(rest)
        elif isinstance(g, ForallSet) and isinstance(g.body, Imp):
            m = _match_guard(g.body.left, g.var)
            if m is not None:
                return m[0], m[1], g.body.right
        return None

    def _match_guard(g: Formula, set_name: str) -> tuple[Formula, str] | None:
        if isinstance(g, Forall) and isinstance(g.body, Imp):
            ante = g.body.left
            if (
                isinstance(ante, Member)
                and ante.var == g.var
                and ante.set_var == set_name
            ):
                psi = g.body.right
                _, psi_sets = fv(psi)
                if set_name not in psi_sets:
                    return (psi, g.var)
        return None

    return go(f)


# ---------------------------------------------------------------------------
# Characteristic sentences
# ---------------------------------------------------------------------------


class _ChiBuilder:
    """Hash-consing formula factory with a work budget.

    Formulas are interned so identical subformulas are shared; the budget
    bounds both interned-node count and recursion work, and blowing it
    raises instead of truncating.
    """

    def __init__(self, budget: int) -> None:
        self.budget = budget
        self.table: dict[tuple, Formula] = {}
        self.nodes = 0
        self.work = 0

    def charge(self, amount: int = 1) -> None:
        self.work += amount
        if self.work > self.budget:
            raise ResourceLimitError(
                f"characteristic-sentence work exceeded budget {self.budget}"
            )

    def _intern(self, key: tuple, build) -> Formula:
        got = self.table.get(key)
        if got is None:
            got = build()
            self.table[key] = got
            self.nodes += 1
            if self.nodes > self.budget:
                raise ResourceLimitError(
                    f"characteristic sentence exceeded node budget {self.budget}"
                )
        return got

    def atom(self, kind: str, *payload) -> Formula:
        key = (kind,) + payload
        ctor = {
            "true": lambda: TRUE,
            "false": lambda: FALSE,
            "eq": lambda: Eq(*payload),
            "edge": lambda: Edge(*payload),
            "label": lambda: Label(*payload),
            "root": lambda: Root(*payload),
            "in": lambda: Member(*payload),
        }[kind]
        return self._intern(key, ctor)

    def neg(self, f: Formula) -> Formula:
        return self._intern(("not", id(f)), lambda: Not(f))

    def conj(self, parts: tuple[Formula, ...]) -> Formula:
        if not parts:
            return self.atom("true")
        if len(parts) == 1:
            return parts[0]
        return self._intern(("and",) + tuple(map(id, parts)), lambda: And(parts))

    def disj(self, parts: tuple[Formula, ...]) -> Formula:
        if not parts:
            return self.atom("false")
        if len(parts) == 1:
            return parts[0]
        return self._intern(("or",) + tuple(map(id, parts)), lambda: Or(parts))

    def quant(self, kind: str, var: str, body: Formula) -> Formula:
        ctor = {
            "exists": Exists,
            "forall": Forall,
            "existsS": ExistsSet,
            "forallS": ForallSet,
        }[kind]
        return self._intern((kind, var, id(body)), lambda: ctor(var, body))


def _colored_tree_code(
    t: LabeledTree, points: tuple[int, ...], sets: tuple[frozenset[int], ...]
) -> tuple:
    """Canonical code of t with parameter positions painted onto nodes."""
    order = []
    stack = [t.root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(t.children[u])
    codes: dict[int, tuple] = {}
    for u in reversed(order):
        color = (
            t.label[u],
            tuple(i for i, a in enumerate(points) if a == u),
            tuple(s for s, ss in enumerate(sets) if u in ss),
        )
        codes[u] = (color, tuple(sorted(codes[c] for c in t.children[u])))
    return codes[t.root]


def characteristic_formula(
    struct: Structure,
    m: int,
    points: tuple[int, ...] = (),
    sets: tuple[frozenset[int], ...] = (),
    budget: int = 10_000_000,
) -> Formula:
    """Rank-m description of (struct, points, sets) up to m-round equivalence.

    Free variables x1..xk name the points and X1..Xj the sets, in order. A
    structure B with parameters satisfies the result under the matching
    assignment iff it is rank-m equivalent to (struct, points, sets). With
    no parameters the result is a sentence.
    """
    builder = _ChiBuilder(budget)
    uni = struct.universe
    tree = struct.source if isinstance(struct.source, LabeledTree) else None
    semantic: dict[tuple, Formula] = {}

    def chi0(pts: tuple[int, ...], sts: tuple[frozenset[int], ...]) -> Formula:
        parts: list[Formula] = []
        for i, a in enumerate(pts):
            xi = f"x{i + 1}"
            if struct.label_of is not None and struct.num_labels >= 1:
                parts.append(builder.atom("label", struct.label_of[a], xi))
            if struct.root is not None:
                atom = builder.atom("root", xi)
                parts.append(atom if a == struct.root else builder.neg(atom))
            for s, ss in enumerate(sts):
                atom = builder.atom("in", xi, f"X{s + 1}")
                parts.append(atom if a in ss else builder.neg(atom))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                xi, xj = f"x{i + 1}", f"x{j + 1}"
                eq_atom = builder.atom("eq", xi, xj)
                parts.append(eq_atom if pts[i] == pts[j] else builder.neg(eq_atom))
                e_atom = builder.atom("edge", xi, xj)
                parts.append(
                    e_atom if struct.has_edge(pts[i], pts[j]) else builder.neg(e_atom)
                )
        return builder.conj(tuple(parts))

    def chi(k: int, pts: tuple[int, ...], sts: tuple[frozenset[int], ...]) -> Formula:
        builder.charge()
        if k == 0:
            return chi0(pts, sts)
        memo_key: tuple | None = None
        if tree is not None:
            memo_key = (k, len(pts), len(sts), _colored_tree_code(tree, pts, sts))
            got = semantic.get(memo_key)
            if got is not None:
                return got
        pvar = f"x{len(pts) + 1}"
        svar = f"X{len(sts) + 1}"
        point_branches: list[Formula] = []
        seen: set[int] = set()
        for a in uni:
            c = chi(k - 1, pts + (a,), sts)
            if id(c) not in seen:
                seen.add(id(c))
                point_branches.append(c)
        set_branches: list[Formula] = []
        seen = set()
        for ss in subsets_in_order(uni):
            c = chi(k - 1, pts, sts + (ss,))
            if id(c) not in seen:
                seen.add(id(c))
                set_branches.append(c)
        parts = (
            tuple(builder.quant("exists", pvar, c) for c in point_branches)
            + (builder.quant("forall", pvar, builder.disj(tuple(point_branches))),)
            + tuple(builder.quant("existsS", svar, c) for c in set_branches)
            + (builder.quant("forallS", svar, builder.disj(tuple(set_branches))),)
        )
        out = builder.conj(parts)
        if memo_key is not None:
            semantic[memo_key] = out
        return out

    return chi(m, tuple(points), tuple(sets))


def characteristic_sentence(
    struct: Structure, m: int, budget: int = 10_000_000
) -> Formula:
    """Rank-m sentence satisfied by exactly the structures rank-m equivalent
    to struct."""
    return characteristic_formula(struct, m, (), (), budget)


# ---------------------------------------------------------------------------
# Random formulas
# ---------------------------------------------------------------------------


def sample_formula(
    seed: int, m: int, vocab: Vocabulary = Vocabulary(), size: int = 12
) -> Formula:
    """Deterministic random closed formula of rank at most m.

    With m = 0 the result is a connective tree over (true)/(false), since no
    variable can be bound.
    """
    rng = random.Random(seed)

    def atom(pts: list[str], sts: list[str]) -> Formula:
        options: list[str] = ["const"]
        if pts:
            options += ["eq", "edge", "eq", "edge"]
            if vocab.num_labels >= 1:
                options += ["label", "label"]
            if vocab.has_root:
                options.append("root")
            if sts:
                options += ["in", "in"]
        kind = rng.choice(options)
        if kind == "const":
            return TRUE if rng.random() < 0.5 else FALSE
        if kind == "eq":
            return Eq(rng.choice(pts), rng.choice(pts))
        if kind == "edge":
            return Edge(rng.choice(pts), rng.choice(pts))
        if kind == "label":
            return Label(rng.randint(1, vocab.num_labels), rng.choice(pts))
        if kind == "root":
            return Root(rng.choice(pts))
        return Member(rng.choice(pts), rng.choice(sts))

    def go(q_budget: int, fuel: int, pts: list[str], sts: list[str]) -> Formula:
        if fuel <= 0:
            return atom(pts, sts)
        moves = ["atom", "not", "and", "or", "imp"]
        if q_budget >= 1:
            moves += ["exists", "exists", "forall", "forall", "existsS", "forallS"]
        kind = rng.choice(moves)
        if kind == "atom":
            return atom(pts, sts)
        if kind == "not":
            return Not(go(q_budget, fuel - 1, pts, sts))
        if kind in ("and", "or"):
            n_parts = rng.randint(2, 3)
            parts = tuple(go(q_budget, fuel - 1, pts, sts) for _ in range(n_parts))
            return And(parts) if kind == "and" else Or(parts)
        if kind == "imp":
            return Imp(go(q_budget, fuel - 1, pts, sts), go(q_budget, fuel - 1, pts, sts))
        if kind in ("exists", "forall"):
            v = f"x{len(pts) + 1}"
            body = go(q_budget - 1, fuel - 1, pts + [v], sts)
            return Exists(v, body) if kind == "exists" else Forall(v, body)
        v = f"X{len(sts) + 1}"
        body = go(q_budget - 1, fuel - 1, pts, sts + [v])
        return ExistsSet(v, body) if kind == "existsS" else ForallSet(v, body)

    out = go(m, rng.randint(2, size), [], [])
    assert rank(out) <= m
    return out
