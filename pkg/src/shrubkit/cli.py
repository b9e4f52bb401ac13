"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 semantic or validation failure,
3 resource budget exceeded. Errors go to stderr prefixed with "code=".
Randomized commands take an explicit --seed so runs are reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .census import index_lower_bound, recognize
from .core import (
    Graph,
    LabeledTree,
    Signature,
    TreeModel,
    graph_from_text,
    graph_to_text,
    load_structure_file,
    tree_model_from_json,
    tree_model_to_json,
    tree_to_json,
)
from .ef import distinguish, ef_equivalent
from .errors import (
    FormulaSyntaxError,
    KernelVerificationError,
    ResourceLimitError,
    StructuralError,
    UnboundVariableError,
    UsageError,
    ValidationError,
)
from .interp import interpret
from .logic import (
    Structure,
    Vocabulary,
    characteristic_sentence,
    evaluate,
    format_formula,
    parse_formula,
    sample_formula,
)
from .shrink import (
    Bounds,
    CapPolicy,
    format_bound,
    shrink_graph_with_report,
    shrink_tree_with_report,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _policy_from_args(args) -> CapPolicy:
    if args.policy == "fixed":
        if args.cap is None:
            raise UsageError("--policy fixed requires --cap")
        return CapPolicy.fixed(args.cap)
    if args.cap is not None:
        raise UsageError(f"--cap only applies to --policy fixed, not {args.policy}")
    return CapPolicy.certified() if args.policy == "certified" else CapPolicy.auto()


def _as_structure(obj) -> Structure:
    if isinstance(obj, TreeModel):
        return Structure.from_graph(interpret(obj), num_labels=obj.r)
    if isinstance(obj, LabeledTree):
        return Structure.from_tree(obj)
    if isinstance(obj, Graph):
        return Structure.from_graph(obj)
    raise StructuralError(f"unsupported structure {type(obj).__name__}")


def _write_or_print(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _figure_path(args) -> str | None:
    if getattr(args, "no_fig", False):
        return None
    if getattr(args, "fig", None):
        return args.fig
    if getattr(args, "out", None):
        return args.out + ".png"
    return None


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _random_model(rng: random.Random, d: int, r: int, leaves: int, density: float) -> TreeModel:
    if d == 0:
        nested: dict = {"label": rng.randint(1, r)}
    else:
        level: list[dict] = [{"label": rng.randint(1, r)} for _ in range(leaves)]
        for depth in range(d, 0, -1):
            if depth == 1:
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


def cmd_gen(args) -> int:
    n = args.leaves
    if n < 1:
        raise UsageError("--leaves must be >= 1")
    if args.family == "clique":
        nested = {"label": 2, "children": [{"label": 1} for _ in range(n)]}
        tm = TreeModel(
            LabeledTree.from_nested(2, nested), Signature.make(1, 1, [(1, 1, 1)])
        )
    elif args.family == "star":
        kids = [{"label": 1}] + [{"label": 2} for _ in range(n - 1)]
        tm = TreeModel(
            LabeledTree.from_nested(3, {"label": 3, "children": kids}),
            Signature.make(2, 1, [(1, 2, 1)]),
        )
    elif args.family == "edgeless":
        nested = {"label": 2, "children": [{"label": 1} for _ in range(n)]}
        tm = TreeModel(LabeledTree.from_nested(2, nested), Signature.make(1, 1, []))
    else:
        if args.seed is None:
            raise UsageError("--family random requires --seed")
        rng = random.Random(args.seed)
        leaves = 1 if args.d == 0 else n
        tm = _random_model(rng, args.d, args.r, leaves, args.density)
    _write_or_print(json.dumps(tree_model_to_json(tm), indent=2), args.out)
    return 0


# ---------------------------------------------------------------------------
# interpret / check / equiv / chi
# ---------------------------------------------------------------------------


def cmd_interpret(args) -> int:
    obj = load_structure_file(args.model)
    if not isinstance(obj, TreeModel):
        raise StructuralError(f"{args.model} does not contain a tree model")
    _write_or_print(graph_to_text(interpret(obj)), args.out)
    return 0


def cmd_check(args) -> int:
    if (args.formula is None) == (args.formula_file is None):
        raise UsageError("provide exactly one of --formula / --formula-file")
    text = args.formula
    if text is None:
        with open(args.formula_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    formula = parse_formula(text)
    struct = _as_structure(load_structure_file(args.structure))
    print("true" if evaluate(struct, formula) else "false")
    return 0


def cmd_equiv(args) -> int:
    sa = _as_structure(load_structure_file(args.left))
    sb = _as_structure(load_structure_file(args.right))
    if sa.root is None and sb.root is None:
        # Align inferred label vocabularies of two plain graphs.
        p = max(sa.num_labels, sb.num_labels)
        sa = Structure(sa.universe, sa.edges, sa.label_of, p, None, sa.source)
        sb = Structure(sb.universe, sb.edges, sb.label_of, p, None, sb.source)
    if ef_equivalent(sa, sb, args.m, size_limit=args.size_limit):
        print("equivalent")
    else:
        print("inequivalent")
        witness = distinguish(sa, sb, args.m, size_limit=args.size_limit)
        if witness is not None:
            print(format_formula(witness))
    return 0


def cmd_chi(args) -> int:
    struct = _as_structure(load_structure_file(args.structure))
    sentence = characteristic_sentence(struct, args.m, budget=args.chi_budget)
    print(format_formula(sentence))
    return 0


# ---------------------------------------------------------------------------
# shrink
# ---------------------------------------------------------------------------


def cmd_shrink(args) -> int:
    policy = _policy_from_args(args)
    obj = load_structure_file(args.input)
    bounds = Bounds(c0=args.c0, c1=args.c1)
    if isinstance(obj, LabeledTree):
        out, report = shrink_tree_with_report(
            obj, args.m, policy, bounds=bounds, size_limit=args.size_limit
        )
        if args.out:
            _write_or_print(json.dumps(tree_to_json(out), indent=2), args.out)
    elif isinstance(obj, TreeModel):
        model, graph, report = shrink_graph_with_report(
            obj, args.m, policy, bounds=bounds, size_limit=args.size_limit
        )
        if args.out:
            _write_or_print(json.dumps(tree_model_to_json(model), indent=2), args.out)
        if args.graph_out:
            _write_or_print(graph_to_text(graph), args.graph_out)
    else:
        raise StructuralError(f"{args.input} holds neither a tree nor a tree model")
    print(report.to_text())
    if args.report:
        _write_or_print(report.dumps(), args.report)
    fig = args.fig
    if fig:
        from .figures import save_shrink_figure

        save_shrink_figure(report.to_json(), fig)
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    bnd = Bounds(c0=args.c0, c1=args.c1)
    d = args.d
    rows: list[tuple[str, object]] = [
        (f"g({d})", bnd.g(d)),
        (f"h({d})", bnd.h(d)),
    ]
    if args.p is not None and args.m is not None:
        rows.append((f"zeta({d}, {args.p}, {args.m}, {d})", bnd.zeta(d, args.p, args.m, d)))
        rows.append(
            (f"tree_index_bound({d}, {args.p}, {args.m})", bnd.tree_index_bound(d, args.p, args.m))
        )
        rows.append((f"rho({d}, {args.p}, {args.m})", bnd.rho(d, args.p, args.m)))
    if args.r is not None and args.m is not None:
        rows.append(
            (f"graph_kernel_bound({d}, {args.r}, {args.m})", bnd.graph_kernel_bound(d, args.r, args.m))
        )
        rows.append(
            (f"graph_index_bound({d}, {args.r}, {args.m})", bnd.graph_index_bound(d, args.r, args.m))
        )
    if args.q is not None and args.sigma_size is not None:
        rows.append(
            (f"monadic_cap({args.q}, {args.sigma_size})", bnd.monadic_cap(args.q, args.sigma_size))
        )
    notes = bnd.notes(d=d, p=args.p, m=args.m)
    if args.json:
        # Values past 64 bits go out as descriptive strings; exact digit
        # strings of million-bit integers help nobody downstream.
        payload = {
            name: (value if isinstance(value, int) and value.bit_length() <= 64
                   else format_bound(value))
            for name, value in rows
        }
        payload["notes"] = notes
        print(json.dumps(payload, indent=2))
    else:
        for name, value in rows:
            print(f"{name} = {format_bound(value)}")
        for note in notes:
            print(f"note: {note}")
    return 0


# ---------------------------------------------------------------------------
# index
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def _index_case(case: tuple[int, int, int, int]) -> dict:
    d, p, m, max_nodes = case
    start = time.perf_counter()
    classes = index_lower_bound(d, p, m, max_nodes)
    ms = (time.perf_counter() - start) * 1000.0
    return {
        "d": d,
        "p": p,
        "m": m,
        "maxNodes": max_nodes,
        "classes": classes,
        "wallclock_ms": round(ms, 3),
    }


def cmd_index(args) -> int:
    cases = [
        (d, p, m, mn)
        for d in _int_list(args.d)
        for p in _int_list(args.p)
        for m in _int_list(args.m)
        for mn in _int_list(args.max_nodes)
    ]
    if not cases:
        raise UsageError("no cases to run")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_index_case, cases))
    else:
        rows = [_index_case(c) for c in cases]
    fields = ["d", "p", "m", "maxNodes", "classes", "wallclock_ms"]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    fig = _figure_path(args)
    if fig:
        from .figures import save_index_figure

        save_index_figure(rows, fig)
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _bench_case(case: tuple[str, str, int, str]) -> dict:
    g_text, h_text, r, formula_text = case
    sg = Structure.from_graph(graph_from_text(g_text), num_labels=r)
    sh = Structure.from_graph(graph_from_text(h_text), num_labels=r)
    formula = parse_formula(formula_text)
    start = time.perf_counter()
    naive = evaluate(sg, formula)
    naive_ms = (time.perf_counter() - start) * 1000.0
    start = time.perf_counter()
    fast = evaluate(sh, formula)
    kernel_ms = (time.perf_counter() - start) * 1000.0
    return {
        "naive_ms": round(naive_ms, 4),
        "kernel_ms": round(kernel_ms, 4),
        "naive": naive,
        "kernel": fast,
    }


def cmd_bench(args) -> int:
    obj = load_structure_file(args.model)
    if not isinstance(obj, TreeModel):
        raise StructuralError(f"{args.model} does not contain a tree model")
    policy = _policy_from_args(args)
    g = interpret(obj)
    _, kernel, report = shrink_graph_with_report(
        obj, args.m, policy, size_limit=args.size_limit
    )
    corpus = [
        sample_formula(args.seed + i, args.m, Vocabulary(obj.r, False))
        for i in range(args.corpus_size)
    ]
    g_text, h_text = graph_to_text(g), graph_to_text(kernel)
    cases = [(g_text, h_text, obj.r, format_formula(f)) for f in corpus]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_bench_case, cases))
    else:
        outcomes = [_bench_case(c) for c in cases]
    rows = []
    for i, out in enumerate(outcomes):
        if out["naive"] != out["kernel"]:
            raise KernelVerificationError(
                f"verdict mismatch on sentence {i}: {format_formula(corpus[i])}"
            )
        rows.append(
            {
                "formula": i,
                "rank": args.m,
                "naive_ms": out["naive_ms"],
                "kernel_ms": out["kernel_ms"],
                "verdict": "true" if out["naive"] else "false",
            }
        )
    total_naive = sum(r["naive_ms"] for r in rows)
    total_kernel = sum(r["kernel_ms"] for r in rows)
    print(
        f"kernel: {g.n} -> {kernel.n} vertices (mode={report.mode}, "
        f"cap={report.cap}, m={args.m})"
    )
    print(f"sentences: {len(rows)}, verdict agreement: 100%")
    print(
        f"total evaluation: input graph {total_naive:.2f} ms, "
        f"kernel {total_kernel:.2f} ms"
    )
    if args.out:
        fields = ["formula", "rank", "naive_ms", "kernel_ms", "verdict"]
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
    fig = _figure_path(args)
    if fig:
        from .figures import save_bench_figure

        save_bench_figure(rows, fig)
    return 0


# ---------------------------------------------------------------------------
# recognize
# ---------------------------------------------------------------------------


def cmd_recognize(args) -> int:
    obj = load_structure_file(args.graph)
    if isinstance(obj, TreeModel):
        obj = interpret(obj)
    if not isinstance(obj, Graph):
        raise StructuralError(f"{args.graph} does not contain a graph")
    result = recognize(obj, args.r, args.d, budget=args.budget)
    print(f"{result.status} (work={result.work})")
    if result.model is not None and args.out:
        _write_or_print(
            json.dumps(tree_model_to_json(result.model), indent=2), args.out
        )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shrubkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a tree model")
    p.add_argument("--family", choices=["clique", "star", "edgeless", "random"], required=True)
    p.add_argument("--seed", type=int, help="required for --family random")
    p.add_argument("--leaves", type=int, default=4)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("interpret", help="decode a tree model into its graph")
    p.add_argument("model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("check", help="evaluate a sentence on a structure")
    p.add_argument("structure")
    p.add_argument("--formula")
    p.add_argument("--formula-file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("equiv", help="decide rank-m equivalence of two structures")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--size-limit", type=int, default=14)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("chi", help="characteristic sentence of a structure")
    p.add_argument("structure")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--chi-budget", type=int, default=10_000_000)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("shrink", help="type-capping kernel of a tree or tree model")
    p.add_argument("input")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--policy", choices=["auto", "fixed", "certified"], default="auto")
    p.add_argument("--cap", type=int)
    p.add_argument("--c0", type=int, default=2)
    p.add_argument("--c1", type=int, default=3)
    p.add_argument("--size-limit", type=int, default=14)
    p.add_argument("--out")
    p.add_argument("--graph-out")
    p.add_argument("--report")
    p.add_argument("--fig")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("bounds", help="exact bound values")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sigma-size", type=int)
    p.add_argument("--c0", type=int, default=2)
    p.add_argument("--c1", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("index", help="realized class counts as CSV")
    p.add_argument("--d", required=True, help="comma list")
    p.add_argument("--p", required=True, help="comma list")
    p.add_argument("--m", required=True, help="comma list")
    p.add_argument("--max-nodes", required=True, help="comma list")
    p.add_argument("--out")
    p.add_argument("--fig")
    p.add_argument("--no-fig", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("bench", help="evaluation timing, input graph vs kernel")
    p.add_argument("--model", required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--corpus-size", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--policy", choices=["auto", "fixed", "certified"], default="auto")
    p.add_argument("--cap", type=int)
    p.add_argument("--size-limit", type=int, default=14)
    p.add_argument("--out")
    p.add_argument("--fig")
    p.add_argument("--no-fig", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("recognize", help="search for a tree model denoting a graph")
    p.add_argument("graph")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recognize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"code=usage: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"code=usage: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"code=usage: {exc}", file=sys.stderr)
        return 1
    except (
        StructuralError,
        ValidationError,
        KernelVerificationError,
        FormulaSyntaxError,
        UnboundVariableError,
        json.JSONDecodeError,
    ) as exc:
        print(f"code=validation: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"code=resource: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
