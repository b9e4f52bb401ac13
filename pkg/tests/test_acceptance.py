"""The ten acceptance checks, one test each, with a printed verdict line.

Each test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts, so a red run still reports every criterion it reached.
Stated time budgets are asserted too; the sizes here are chosen to sit far
inside them.
"""

from __future__ import annotations

import itertools
import random
import time

from conftest import (
    permuted_graph,
    random_graph,
    random_model,
    random_tree,
    record_criterion,
)
from shrubkit import (
    Bounds,
    CapPolicy,
    Graph,
    LabeledTree,
    Signature,
    TreeModel,
    bound_le,
    characteristic_sentence,
    distinguish,
    ef_equivalent,
    enumerate_trees,
    evaluate,
    index_lower_bound,
    induced_subgraph,
    interpret,
    is_leaf_hereditary_subtree,
    leaf_hereditary_restrict,
    rank,
    recognize,
    sample_formula,
    shrink_graph,
    shrink_tree,
    tower,
    translate_formula,
    verify_shrink,
)
from shrubkit.logic import ExistsSet, ForallSet, Structure, Vocabulary, _children


def count_set_quantifiers(f) -> int:
    n = 1 if isinstance(f, (ExistsSet, ForallSet)) else 0
    return n + sum(count_set_quantifiers(c) for c in _children(f))


def restrict_to_leaves(tm: TreeModel, keep: set[int]) -> TreeModel:
    doomed = [
        v
        for v in tm.tree.node_ids
        if v != tm.tree.root and not (tm.tree.subtree_ids(v) & keep)
    ]
    return TreeModel(leaf_hereditary_restrict(tm.tree, doomed), tm.sig)


def test_criterion_01_index_is_p_at_depth_zero():
    start = time.perf_counter()
    checked = 0
    ok = True
    for p in (1, 2, 3):
        for m in (1, 2):
            ok = ok and index_lower_bound(0, p, m, 1) == p
            checked += 1
    elapsed = time.perf_counter() - start
    assert record_criterion(
        1, "d=0 index equals p", ok and elapsed < 1.0,
        f"{checked} (p, m) combinations exact in {elapsed:.2f}s",
    )


def test_criterion_02_tree_kernel_soundness():
    start = time.perf_counter()
    rng = random.Random(20_001)
    trees = 0
    verified = 0
    for _ in range(200):
        t = random_tree(rng, rng.randint(0, 2), rng.randint(1, 2), rng.randint(1, 25))
        trees += 1
        for m in (1, 2):
            t2 = shrink_tree(t, m, CapPolicy.auto())
            if (
                verify_shrink(t, t2, m)
                and is_leaf_hereditary_subtree(t2, t)
                and t2.height == t.height
            ):
                verified += 1
    elapsed = time.perf_counter() - start
    ok = verified == 2 * trees and elapsed < 600
    assert record_criterion(
        2, "tree kernels verified", ok,
        f"{verified}/{2 * trees} shrinks verified over {trees} trees in {elapsed:.1f}s",
    )


def test_criterion_03_graph_kernel_soundness():
    start = time.perf_counter()
    rng = random.Random(20_002)
    good = 0
    total = 100
    for _ in range(total):
        tm = random_model(
            rng, rng.randint(0, 2), rng.randint(1, 2), rng.randint(1, 20),
            rng.uniform(0.2, 0.9),
        )
        g = interpret(tm)
        _, h = shrink_graph(tm, 1, CapPolicy.auto())
        sa = Structure.from_graph(g, num_labels=tm.r)
        sb = Structure.from_graph(h, num_labels=tm.r)
        if (
            h.vertices <= g.vertices
            and h == induced_subgraph(g, h.vertices)
            and ef_equivalent(sa, sb, 1)
        ):
            good += 1
    elapsed = time.perf_counter() - start
    ok = good == total and elapsed < 600
    assert record_criterion(
        3, "graph kernels verified", ok,
        f"{good}/{total} induced-subgraph kernels rank-1 equivalent in {elapsed:.1f}s",
    )


def test_criterion_04_interpretation_transfer():
    start = time.perf_counter()
    rng = random.Random(20_003)
    agree = 0
    total = 100
    for i in range(total):
        d = rng.randint(0, 2)
        r = rng.randint(1, 2)
        phi = sample_formula(30_000 + i, 2, Vocabulary(r, False))
        leaf_cap = 7 if count_set_quantifiers(phi) >= 2 else 12
        tm = random_model(rng, d, r, rng.randint(1, leaf_cap), rng.uniform(0.2, 0.9))
        xi = translate_formula(phi, tm.sig)
        on_graph = evaluate(Structure.from_graph(interpret(tm), num_labels=r), phi)
        on_tree = evaluate(Structure.from_tree(tm.tree), xi)
        if on_graph == on_tree:
            agree += 1
    elapsed = time.perf_counter() - start
    ok = agree == total and elapsed < 300
    assert record_criterion(
        4, "interpretation transfer", ok,
        f"{agree}/{total} (model, sentence) pairs agree in {elapsed:.1f}s",
    )


def test_criterion_05_restriction_commutes():
    start = time.perf_counter()
    rng = random.Random(20_004)
    equal = 0
    total = 100
    for _ in range(total):
        tm = random_model(
            rng, rng.randint(0, 2), rng.randint(1, 2), rng.randint(1, 12),
            rng.uniform(0.2, 0.9),
        )
        leaves = list(tm.tree.leaves)
        keep = set(rng.sample(leaves, rng.randint(1, len(leaves))))
        tm2 = restrict_to_leaves(tm, keep)
        if interpret(tm2) == induced_subgraph(interpret(tm), keep):
            equal += 1
    elapsed = time.perf_counter() - start
    ok = equal == total
    assert record_criterion(
        5, "restriction commutes with interpretation", ok,
        f"{equal}/{total} structural equalities in {elapsed:.1f}s",
    )


def test_criterion_06_bound_calculators():
    start = time.perf_counter()
    b = Bounds()
    exact = (
        tower(2, 3) == 256
        and all(b.g(d) == 28 ** d for d in range(9))
        and b.monadic_cap(3, 2) == 5
        and b.zeta(1, 1, 1, 1) == 2 ** 56
        and b.rho(0, 1, 1) == 65536
    )
    rng = random.Random(20_005)
    monotone = 0
    total = 1_000
    for _ in range(total):
        d = rng.randint(0, 3)
        p = rng.randint(1, 4)
        m = rng.randint(1, 4)
        fine = (
            bound_le(b.zeta(d, p, m, d), b.zeta(d + 1, p, m, d + 1))
            and bound_le(b.zeta(d, p, m, d), b.zeta(d, p + 1, m, d))
            and bound_le(b.zeta(d, p, m, d), b.zeta(d, p, m + 1, d))
            and bound_le(b.rho(d, p, m), b.rho(d + 1, p, m))
            and bound_le(b.rho(d, p, m), b.rho(d, p + 1, m))
            and bound_le(b.rho(d, p, m), b.rho(d, p, m + 1))
            and b.monadic_cap(m, p) <= b.monadic_cap(m + 1, p)
        )
        if fine:
            monotone += 1
    elapsed = time.perf_counter() - start
    ok = exact and monotone == total and elapsed < 1.0
    assert record_criterion(
        6, "bound calculators exact and monotone", ok,
        f"frozen values exact, {monotone}/{total} tuples monotone in {elapsed:.2f}s",
    )


def test_criterion_07_characteristic_sentences_match_games():
    start = time.perf_counter()
    structs = [Structure.from_tree(t) for t in enumerate_trees(1, 2, 5)]
    chis = [characteristic_sentence(s, 1) for s in structs]
    mismatches = 0
    pairs = 0
    for i, a in enumerate(structs):
        for b in structs:
            sat = evaluate(b, chis[i])
            eq = ef_equivalent(a, b, 1)
            if sat != eq:
                mismatches += 1
            pairs += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 600
    assert record_criterion(
        7, "characteristic sentences match the game", ok,
        f"{pairs} ordered pairs over {len(structs)} trees, {mismatches} mismatches in {elapsed:.1f}s",
    )


def test_criterion_08_oracle_against_evaluator():
    start = time.perf_counter()
    rng = random.Random(20_006)
    graph_corpus = [sample_formula(40_000 + i, 2, Vocabulary(2, False)) for i in range(100)]
    tree_corpus = [sample_formula(41_000 + i, 2, Vocabulary(2, True)) for i in range(100)]
    small_trees = list(enumerate_trees(2, 2, 7))

    pairs = []
    for _ in range(20):  # engineered equivalent graph pairs
        g = random_graph(rng, rng.randint(2, 7), 2)
        pairs.append(
            (
                Structure.from_graph(g, num_labels=2),
                Structure.from_graph(permuted_graph(rng, g), num_labels=2),
                graph_corpus,
            )
        )
    for _ in range(20):  # unconstrained graph pairs
        a = random_graph(rng, rng.randint(1, 7), 2)
        b = random_graph(rng, rng.randint(1, 7), 2)
        pairs.append(
            (
                Structure.from_graph(a, num_labels=2),
                Structure.from_graph(b, num_labels=2),
                graph_corpus,
            )
        )
    for _ in range(10):  # tree pairs
        a = rng.choice(small_trees)
        b = rng.choice(small_trees)
        pairs.append((Structure.from_tree(a), Structure.from_tree(b), tree_corpus))

    equivalent_pairs = 0
    distinguished = 0
    failures = 0
    for a, b, corpus in pairs:
        if ef_equivalent(a, b, 2):
            equivalent_pairs += 1
            for sentence in corpus:
                if evaluate(a, sentence) != evaluate(b, sentence):
                    failures += 1
        else:
            w = distinguish(a, b, 2)
            if w is None or rank(w) > 2 or evaluate(a, w) == evaluate(b, w):
                failures += 1
            else:
                distinguished += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and equivalent_pairs + distinguished == len(pairs) and equivalent_pairs >= 20
    assert record_criterion(
        8, "game verdicts against the evaluator", ok,
        f"{equivalent_pairs} equivalent pairs agree on the corpus, "
        f"{distinguished} inequivalent pairs got verified witnesses in {elapsed:.1f}s",
    )


def test_criterion_09_recognizer_sanity():
    start = time.perf_counter()
    ok = True

    for n in range(1, 6):
        kn = Graph.make(range(n), itertools.combinations(range(n), 2))
        result = recognize(kn, 1, 1)
        ok = ok and result.status == "found"
        out = interpret(result.model)
        ok = ok and out.vertices == kn.vertices and out.edges == kn.edges
        if n >= 2:
            ok = ok and set(result.model.sig.triples()) == {(1, 1, 1)}

    p4 = Graph.make(range(4), [(0, 1), (1, 2), (2, 3)])
    ok = ok and recognize(p4, 1, 1).status == "no"

    rng = random.Random(20_007)
    probes = 0
    while probes < 50:
        tm = random_model(rng, rng.randint(1, 2), rng.randint(1, 2), rng.randint(2, 5), 0.7)
        g = interpret(tm)
        if not 2 <= g.n <= 5:
            continue
        keep = rng.sample(sorted(g.vertices), rng.randint(1, g.n - 1))
        h = induced_subgraph(g, keep)
        plain = Graph.make(h.vertices, h.edge_pairs())
        result = recognize(plain, tm.r, tm.d, budget=500_000)
        ok = ok and result.status == "found"
        ok = ok and interpret(result.model).edges == plain.edges
        probes += 1

    elapsed = time.perf_counter() - start
    assert record_criterion(
        9, "recognizer sanity", ok,
        f"K1..K5 found, P4 refused, {probes} hereditarity probes in {elapsed:.1f}s",
    )


def test_criterion_10_bench_integrity():
    start = time.perf_counter()
    nested = {"label": 2, "children": [{"label": 1}] * 8}
    tm = TreeModel(
        LabeledTree.from_nested(2, nested), Signature.make(1, 1, [(1, 1, 1)])
    )
    g = interpret(tm)
    _, h = shrink_graph(tm, 2, CapPolicy.auto())
    corpus = [sample_formula(50_000 + i, 2, Vocabulary(1, False)) for i in range(100)]
    sg = Structure.from_graph(g, num_labels=1)
    sh = Structure.from_graph(h, num_labels=1)

    agree = 0
    naive_total = 0.0
    kernel_total = 0.0
    for sentence in corpus:
        t0 = time.perf_counter()
        naive = evaluate(sg, sentence)
        naive_total += time.perf_counter() - t0
        t0 = time.perf_counter()
        fast = evaluate(sh, sentence)
        kernel_total += time.perf_counter() - t0
        if naive == fast:
            agree += 1
    elapsed = time.perf_counter() - start
    ok = agree == len(corpus) and kernel_total < naive_total
    assert record_criterion(
        10, "bench integrity on the 8-clique model", ok,
        f"{agree}/{len(corpus)} verdicts agree, kernel {kernel_total * 1e3:.1f}ms "
        f"vs input {naive_total * 1e3:.1f}ms in {elapsed:.1f}s",
    )
