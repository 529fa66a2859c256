"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are also gathered into
a section of the terminal summary.
"""

import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import SMALL_TEXT, random_fib
from fibcomp.entropy import (coupon_bound, shannon_entropy,
                             simulate_coupons, solve_barrier_compact, solve_barrier_entropy)
from fibcomp.fib import oracle_lookup, parse_fib
from fibcomp.pdag import PdagBlob, dag_build, dag_lookup, dag_size_report, serialize_pdag, update_visit_bound
from fibcomp.trie import build_trie, leaf_push, trie_lookup
from fibcomp.workbench import (apply_update, bench_lookup, fib_entropy_report, gen_fib_split, gen_string_model,
                               gen_updates, random_addresses)
from fibcomp.xbwb import XbwTransform, xbw_build, xbw_lookup, xbw_size_report

RESULTS: dict[tuple[int, str], str] = {}


@contextmanager
def criterion(number, title):
    info = {"detail": ""}
    try:
        yield info
    except BaseException as e:
        detail = info["detail"] or f"{type(e).__name__}: {e}"
        _emit(number, title, False, detail)
        raise
    _emit(number, title, True, info["detail"])


def _emit(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}  {title}" + (f"  ({detail})" if detail else "")
    RESULTS[number, title] = line
    print(line)


@pytest.fixture(scope="module")
def fib_600k():
    fib = gen_fib_split(600_000, 4, 0.6, seed=1)
    trie = leaf_push(build_trie(fib), 0)
    return fib, trie


@pytest.fixture(scope="module")
def structures_600k(fib_600k):
    fib, trie = fib_600k
    return dag_build(fib, 11), xbw_build(trie, delta=fib.delta)


def test_01_small_xbw_exact():
    with criterion(1, "XBW-b of the four-bit example is bit exact") as c:
        t0 = time.perf_counter()
        x = xbw_build(leaf_push(build_trie(parse_fib(SMALL_TEXT, 4)), 0))
        s_i, s_a = x.s_i.to_str(), list(x.s_alpha)
        c["detail"] = f"S_I={s_i} S_alpha={s_a}"
        assert s_i == "001001111"
        assert s_a == [2, 3, 2, 2, 1]
        assert time.perf_counter() - t0 < 1


def test_02_exhaustive_equivalence():
    with criterion(2, "oracle = trie = XBW-b = pDAG on every address") as c:
        rng = random.Random(2024)
        mismatches = 0
        t0 = time.perf_counter()
        for width, tables, max_entries in ((8, 100, 80), (12, 20, 400)):
            for _ in range(tables):
                fib = random_fib(rng, width, rng.randint(1, max_entries))
                control = build_trie(fib)
                x = xbw_build(leaf_push(control, 0))
                dags = [dag_build(fib, lam) for lam in (0, 2, 4, width)]
                for a in range(2 ** width):
                    want = oracle_lookup(fib, a)
                    got = [trie_lookup(control, a), xbw_lookup(x, a)] + [dag_lookup(d, a) for d in dags]
                    mismatches += sum(g != want for g in got)
        elapsed = time.perf_counter() - t0
        c["detail"] = f"{mismatches} mismatches, {elapsed:.0f}s"
        assert mismatches == 0
        assert elapsed < 120


@pytest.fixture(scope="module")
def update_run():
    """7,500 mixed updates at W=16, barrier 8, checked after every step."""
    width, barrier = 16, 8
    fib = gen_fib_split(3000, 4, 0.6, seed=11, width=width)
    updates = gen_updates("random", 7500, fib, seed=12)
    dag = dag_build(fib, barrier)
    rng = random.Random(13)
    addresses = [rng.getrandbits(width) for _ in range(2000)]
    # independent oracle: one table per prefix length, longest first
    by_length = [dict() for _ in range(width + 1)]
    for p, s in fib.routes.items():
        by_length[p.length][p.path] = s

    def oracle(a):
        for length in range(width, -1, -1):
            s = by_length[length].get(a >> (width - length))
            if s is not None:
                return s
        return None

    expected = [oracle(a) for a in addresses]
    visits, mismatches = [], 0
    t0 = time.perf_counter()
    lookup = dag.lookup
    for u in updates:
        visits.append(apply_update(dag, u))
        table = by_length[u.prefix.length]
        if u.op == "delete":
            del table[u.prefix.path]
        else:
            table[u.prefix.path] = u.label
        shift = width - u.prefix.length
        for i, a in enumerate(addresses):
            if a >> shift == u.prefix.path:
                expected[i] = oracle(a)
        mismatches += sum(lookup(a) != e for a, e in zip(addresses, expected))
    elapsed = time.perf_counter() - t0
    scratch = dag_build(dag.fib, barrier)
    ops = {op: sum(u.op == op for u in updates) for op in ("change", "insert", "delete")}
    return dict(width=width, barrier=barrier, dag=dag, scratch=scratch, visits=visits,
                mismatches=mismatches, elapsed=elapsed, ops=ops)


def test_03_update_canonicality(update_run):
    r = update_run
    with criterion(3, "7,500 updates keep forwarding and canonical size") as c:
        c["detail"] = (f"ops {r['ops']}, {r['mismatches']} mismatches, nodes {r['dag'].node_count} vs scratch "
                       f"{r['scratch'].node_count}, {r['elapsed']:.0f}s")
        assert all(r["ops"].values())
        assert r["mismatches"] == 0
        assert r["dag"].node_count == r["scratch"].node_count
        assert r["elapsed"] < 120


def test_04_update_locality(update_run):
    r = update_run
    bound = update_visit_bound(r["width"], r["barrier"])
    with criterion(4, "update visits within W + 2^(W-lambda)") as c:
        worst = max(r["visits"])
        c["detail"] = f"max {worst} <= {bound}"
        assert worst <= bound


@pytest.mark.parametrize("width", [14, 17])
def test_05_string_size_bound(width):
    with criterion(5, f"complete-trie string size bound, W={width}") as c:
        t0 = time.perf_counter()
        n = 2 ** width
        fib = gen_string_model(width, 0.5, seed=width)
        barrier = solve_barrier_compact(n, 2).lambda_
        bits = dag_size_report(dag_build(fib, barrier)).analytic_bits
        limit = 4 * n * 1 * 1.15
        c["detail"] = f"lambda={barrier}, {bits} bits <= {limit:.0f}"
        assert bits <= limit
        assert time.perf_counter() - t0 < 60


def test_06_efficiency_curve():
    with criterion(6, "efficiency over Bernoulli strings, W=17") as c:
        t0 = time.perf_counter()
        nu = {}
        for p in (0.005, 0.01, 0.05, 0.1, 0.3, 0.5):
            fib = gen_string_model(17, p, seed=6)
            h0 = shannon_entropy(fib.label_histogram())
            barrier = solve_barrier_entropy(2 ** 17, h0).lambda_
            ent = fib_entropy_report(fib)
            nu[p] = dag_size_report(dag_build(fib, barrier)).analytic_bits / ent.entropy_bits
        c["detail"] = ", ".join(f"nu({p})={v:.2f}" for p, v in nu.items())
        assert all(v <= 4.0 for p, v in nu.items() if p >= 0.1)
        assert nu[0.005] > nu[0.5]
        assert time.perf_counter() - t0 < 300


def _hand_entropy_bits(trie):
    # count the leaves of the normalized trie with a separate walk
    counts = {}
    stack = [trie.root]
    while stack:
        v = stack.pop()
        if v.left is None:
            counts[v.label] = counts.get(v.label, 0) + 1
        else:
            stack.extend((v.left, v.right))
    n = sum(counts.values())
    h0 = sum(c / n * math.log2(n / c) for c in counts.values())
    return n, 2 * n + n * h0


@pytest.mark.parametrize("delta", [4, 5])
def test_07_synthetic_entropy(delta, fib_600k):
    with criterion(7, f"600k split FIB entropy, delta={delta}") as c:
        if delta == 4:
            fib, trie = fib_600k
        else:
            fib = gen_fib_split(600_000, delta, 0.6, seed=1)
            trie = leaf_push(build_trie(fib), 0)
        h0 = shannon_entropy(fib.label_histogram())
        report = fib_entropy_report(fib, trie)
        n, by_hand = _hand_entropy_bits(trie)
        ratio = report.entropy_bits / by_hand
        ratio_entries = report.entropy_bits / (2 * n + n * h0)
        c["detail"] = (f"H0={h0:.3f}, E={report.entropy_bits / 8000:.0f} KB, "
                       f"ratio {ratio:.3f} (leaf H0) {ratio_entries:.3f} (entry H0)")
        assert abs(h0 - 1.06) <= 0.08
        assert abs(ratio - 1) <= 0.10
        assert abs(ratio_entries - 1) <= 0.10


def test_08_xbwb_size(structures_600k):
    _, x = structures_600k
    with criterion(8, "XBW-b entropy-mode size on the 600k FIB") as c:
        t0 = time.perf_counter()
        rep = xbw_size_report(x)
        ratio = rep.bits_entropy / rep.entropy_bound_bits
        c["detail"] = f"{rep.bits_entropy} bits = {ratio:.3f} x (2n + nH0)"
        assert ratio <= 1.25
        assert time.perf_counter() - t0 < 60


def _bracket(target):
    k = 0
    while (k + 1) * 2 ** (k + 1) <= target:
        k += 1
    return k


def test_09_barrier_solver():
    with criterion(9, "barrier solver residual and integer level") as c:
        rng = random.Random(9)
        worst, wrong = 0.0, 0
        for _ in range(1000):
            n = rng.randint(2, 2 ** 40)
            delta = rng.randint(2, 1024)
            target = n * math.log2(delta)
            b = solve_barrier_compact(n, delta)
            worst = max(worst, abs(b.kappa * 2 ** b.kappa - target) / target)
            wrong += b.lambda_ != _bracket(target)
        c["detail"] = f"max residual {worst:.1e}, {wrong} level mismatches"
        assert worst <= 1e-9
        assert wrong == 0


def test_10_coupon_collector():
    with criterion(10, "coupon-collector bound by Monte Carlo") as c:
        rng = np.random.default_rng(10)
        violations, worst = 0, -math.inf
        for _ in range(50):
            k = int(rng.integers(2, 65))
            probs = rng.dirichlet(np.full(k, rng.uniform(0.05, 5.0)))
            for m in (8, 64, 1024):
                counts = simulate_coupons(probs, m, 10_000, rng)
                sigma = counts.std(ddof=1) / math.sqrt(len(counts))
                bound = coupon_bound(probs, m)
                worst = max(worst, counts.mean() - bound)
                violations += counts.mean() > bound + 3 * sigma
        c["detail"] = f"{violations} violations over 150 runs, largest mean - bound = {worst:.2f}"
        assert violations == 0


def test_11_throughput_ordering(fib_600k, structures_600k):
    fib, _ = fib_600k
    dag, x = structures_600k
    with criterion(11, "pDAG lookups at least 10x XBW-b") as c:
        addresses = random_addresses(32, 1 << 16, seed=11)
        blob = PdagBlob.from_bytes(serialize_pdag(dag, include_fib=False))
        fast = bench_lookup(blob, fib, addresses, lookups=500_000)
        slow = bench_lookup(x, fib, addresses, lookups=30_000)
        visits = bench_lookup(dag, fib, addresses, lookups=10_000, visit_sample=len(addresses))
        ratio = fast.lookups_per_sec / slow.lookups_per_sec
        c["detail"] = (f"{fast.lookups_per_sec:,.0f}/s vs {slow.lookups_per_sec:,.0f}/s = {ratio:.1f}x, "
                       f"max visits {visits.visits_max}")
        assert ratio >= 10
        assert visits.visits_max <= 33


def test_12_serialization_roundtrip(fib_600k, structures_600k):
    fib, _ = fib_600k
    dag, x = structures_600k
    with criterion(12, "blob round trip for both formats") as c:
        addresses = random_addresses(32, 10_000, seed=12)
        pdag_bytes = serialize_pdag(dag)
        blob = PdagBlob.from_bytes(pdag_bytes)
        fn = blob.lookup_fn()
        pdag_bad = sum(fn(a) != dag.lookup(a) for a in addresses)
        xbw_bytes = x.to_bytes()
        y = XbwTransform.from_bytes(xbw_bytes)
        xbw_bad = sum(y.lookup(a) != x.lookup(a) for a in addresses)
        c["detail"] = (f"pDAG {len(pdag_bytes)} B, {pdag_bad} mismatches; "
                       f"XBW-b {len(xbw_bytes)} B, {xbw_bad} mismatches")
        assert pdag_bad == xbw_bad == 0
        assert blob.to_bytes() == pdag_bytes
        assert y.to_bytes() == xbw_bytes
        assert all(dag.lookup(a) == oracle for a, oracle in
                   zip(addresses[:1000], map(lambda a: oracle_lookup(fib, a), addresses[:1000])))
