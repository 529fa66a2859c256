"""Synthetic inputs and measurement harnesses.

Every generator is a pure function of its arguments and seed (numpy's
PCG64-backed ``default_rng``).  Benchmarks re-validate the structure under
test against an independent longest-prefix matcher before timing anything.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from fibcomp.entropy import EntropyReport, entropy_report
from fibcomp.fib import DEFAULT_WIDTH, FibError, FibTable, LengthIndex, Prefix, parse_address, parse_prefix
from fibcomp.pdag import (PdagBlob, PrefixDag, dag_build, dag_delete, dag_insert, dag_lookup, dag_size_report,
                          dag_update, update_visit_bound, update_visit_worst_case)
from fibcomp.trie import Trie, build_trie, leaf_push
from fibcomp.xbwb import XbwTransform, xbw_build, xbw_lookup, xbw_size_report

BGP_MEAN_LENGTH = 21.87
BGP_SIGMA = 4.0
BGP_MIN_LENGTH = 8
# share of bgp-like updates that target an entry already in the table
BGP_EXISTING_SHARE = 0.9
MAX_STRING_WIDTH = 24


class BenchError(RuntimeError):
    """The structure under test disagrees with the oracle."""


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str  # "prefix-split", "bernoulli-fib" or "bernoulli-string"
    seed: int = 0
    count: int = 1
    width: int = DEFAULT_WIDTH
    delta: int = 4
    poisson: float = 0.6
    p: float = 0.5

    def generate(self, base: FibTable | None = None) -> FibTable:
        if self.kind == "prefix-split":
            return gen_fib_split(self.count, self.delta, self.poisson, self.seed, self.width)
        if self.kind == "bernoulli-fib":
            if base is None:
                raise ValueError("bernoulli-fib needs a base table")
            return gen_fib_bernoulli(base, self.p, self.seed)
        if self.kind == "bernoulli-string":
            return gen_string_model(self.width, self.p, self.seed)
        raise ValueError(f"unknown generator kind {self.kind!r}")


def truncated_poisson(rng: np.random.Generator, lam: float, low: int, high: int, size: int) -> np.ndarray:
    """Poisson(lam) draws conditioned on low <= k <= high (by rejection)."""
    out = np.empty(0, dtype=np.int64)
    while len(out) < size:
        k = rng.poisson(lam, size=max(1024, 2 * (size - len(out))))
        out = np.concatenate([out, k[(k >= low) & (k <= high)]])
    return out[:size]


def gen_fib_split(n_prefixes: int, delta: int, poisson_param: float, seed: int,
                  width: int = DEFAULT_WIDTH) -> FibTable:
    """Iterative random prefix splitting.

    Starting from the zero-length prefix, a uniformly chosen splittable leaf
    (length < width) is replaced by its two children until ``n_prefixes``
    leaves exist.  Labels are i.i.d. Poisson(poisson_param) restricted to
    [1, delta].
    """
    if n_prefixes < 1 or delta < 1:
        raise ValueError("need n_prefixes >= 1 and delta >= 1")
    if n_prefixes > 2 ** width:
        raise ValueError(f"{n_prefixes} prefixes do not fit in {width} bits")
    rng = np.random.default_rng(seed)
    open_: list[tuple[int, int]] = [(0, 0)]
    full: list[tuple[int, int]] = []
    picks = rng.random(n_prefixes - 1)
    for u in picks:
        i = int(u * len(open_))
        length, path = open_[i]
        open_[i] = open_[-1]
        open_.pop()
        length += 1
        dest = open_ if length < width else full
        dest.append((length, path << 1))
        dest.append((length, (path << 1) | 1))
    leaves = sorted(open_ + full)
    labels = truncated_poisson(rng, poisson_param, 1, delta, len(leaves))
    routes = {Prefix.from_path(path, length, width): int(s)
              for (length, path), s in zip(leaves, labels)}
    return FibTable(routes, width, range(1, delta + 1))


def gen_fib_bernoulli(base: FibTable, p: float, seed: int) -> FibTable:
    """Same prefixes as ``base``; label 1 with probability p, else 2."""
    if not 0 < p <= 0.5:
        raise ValueError("p must lie in (0, 0.5]")
    rng = np.random.default_rng(seed)
    prefixes = [q for q, _ in base.entries]
    draws = rng.random(len(prefixes))
    routes = {q: (1 if u < p else 2) for q, u in zip(prefixes, draws)}
    return FibTable(routes, base.width, (1, 2))


def gen_string_model(width: int, p: float, seed: int) -> FibTable:
    """Complete trie: all 2**width full-length prefixes, Bernoulli labels."""
    if width < 1 or width > MAX_STRING_WIDTH:
        raise ValueError(f"width must lie in [1, {MAX_STRING_WIDTH}]")
    if not 0 < p <= 0.5:
        raise ValueError("p must lie in (0, 0.5]")
    rng = np.random.default_rng(seed)
    draws = rng.random(2 ** width)
    routes = {Prefix(width, path, width): (1 if u < p else 2) for path, u in enumerate(draws)}
    return FibTable(routes, width, (1, 2))


# -- update sequences --------------------------------------------------------

@dataclass(frozen=True)
class Update:
    op: str  # "change", "insert" or "delete"
    prefix: Prefix
    label: int | None = None

    def __str__(self):
        return f"{self.op} {self.prefix}" + ("" if self.label is None else f" {self.label}")


def format_updates(updates: Iterable[Update], names: Sequence[int] = ()) -> str:
    """One update per line; labels are written as source labels."""
    def show(u: Update) -> str:
        if u.label is None:
            return f"{u.op} {u.prefix}"
        name = names[u.label - 1] if u.label <= len(names) else u.label
        return f"{u.op} {u.prefix} {name}"
    return "".join(show(u) + "\n" for u in updates)


def parse_updates(text: str, width: int = DEFAULT_WIDTH, names: Sequence[int] = ()) -> list[Update]:
    """Parse ``change|insert|delete <prefix> [label]`` lines.  Source labels
    map through ``names``; unseen labels are given the next free dense id."""
    dense = {s: i for i, s in enumerate(names, 1)}
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split("#", 1)[0].split()
        if not fields:
            continue
        op = fields[0]
        if op not in ("change", "insert", "delete"):
            raise FibError(f"unknown update op {op!r}", lineno)
        want = 2 if op == "delete" else 3
        if len(fields) != want:
            raise FibError(f"'{op}' takes {want - 1} argument(s)", lineno)
        try:
            prefix = parse_prefix(fields[1], width)
        except FibError as e:
            raise FibError(str(e), lineno) from None
        label = None
        if op != "delete":
            try:
                src = int(fields[2])
            except ValueError:
                raise FibError(f"label {fields[2]!r} is not an integer", lineno) from None
            if src <= 0:
                raise FibError("labels must be positive", lineno)
            if src not in dense:
                dense[src] = len(dense) + 1
            label = dense[src]
        out.append(Update(op, prefix, label))
    return out


def bgp_length_distribution(width: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """(lengths, probabilities) of a discretized normal truncated to
    [8, width], centred so that its mean is exactly 21.87 (scaled to
    ``width`` for narrower tables)."""
    scale = width / 32
    lo = min(BGP_MIN_LENGTH, width)
    lengths = np.arange(lo, width + 1)
    target = BGP_MEAN_LENGTH * scale
    sigma = BGP_SIGMA * scale

    def probs(mu):
        w = np.exp(-0.5 * ((lengths - mu) / sigma) ** 2)
        return w / w.sum()

    a, b = float(lo) - 10 * sigma, float(width) + 10 * sigma
    for _ in range(200):
        mid = 0.5 * (a + b)
        if (lengths * probs(mid)).sum() < target:
            a = mid
        else:
            b = mid
    return lengths, probs(0.5 * (a + b))


class _PrefixPool:
    """Current table keyed by length, with O(1) random pick and removal."""

    def __init__(self, routes: dict[Prefix, int]):
        self.by_len: dict[int, list[Prefix]] = {}
        self.pos: dict[Prefix, int] = {}
        for q in routes:
            self.add(q)

    def __contains__(self, q):
        return q in self.pos

    def add(self, q: Prefix):
        bucket = self.by_len.setdefault(q.length, [])
        self.pos[q] = len(bucket)
        bucket.append(q)

    def remove(self, q: Prefix):
        bucket = self.by_len[q.length]
        i = self.pos.pop(q)
        last = bucket.pop()
        if last != q:
            bucket[i] = last
            self.pos[last] = i

    def pick(self, length: int, u: float) -> Prefix | None:
        bucket = self.by_len.get(length)
        if not bucket:
            return None
        return bucket[int(u * len(bucket))]


def gen_updates(kind: str, count: int, fib: FibTable, seed: int) -> list[Update]:
    """Update sequence valid against ``fib`` as it evolves.

    Each drawn prefix becomes an insert when absent, otherwise a change or a
    delete with equal odds.  "random": uniform length on [0, W] and uniform
    address.  "bgp-like": lengths from ``bgp_length_distribution`` and, most
    of the time, an entry of that length already in the table.  New labels
    follow the table's next-hop histogram.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind not in ("random", "bgp-like"):
        raise ValueError(f"unknown update kind {kind!r}")
    rng = np.random.default_rng(seed)
    width = fib.width
    hist = fib.label_histogram() or {1: 1}
    symbols = np.array(sorted(hist))
    weights = np.array([hist[s] for s in symbols], dtype=float)
    weights /= weights.sum()
    labels = rng.choice(symbols, size=count, p=weights)
    coin = rng.random((count, 3))
    if kind == "random":
        lengths = rng.integers(0, width + 1, size=count)
    else:
        support, probs = bgp_length_distribution(width)
        lengths = rng.choice(support, size=count, p=probs)
    addresses = rng.integers(0, 2 ** width, size=count, dtype=np.uint64)
    pool = _PrefixPool(fib.routes)
    out = []
    for i in range(count):
        length = int(lengths[i])
        prefix = None
        if kind == "bgp-like" and coin[i, 0] < BGP_EXISTING_SHARE:
            prefix = pool.pick(length, coin[i, 1])
        if prefix is None:
            addr = int(addresses[i])
            shift = width - length
            prefix = Prefix(length, (addr >> shift) << shift, width)
        if prefix in pool:
            if coin[i, 2] < 0.5:
                out.append(Update("change", prefix, int(labels[i])))
            else:
                out.append(Update("delete", prefix))
                pool.remove(prefix)
        else:
            out.append(Update("insert", prefix, int(labels[i])))
            pool.add(prefix)
    return out


def apply_update(dag: PrefixDag, u: Update) -> int:
    """Apply one update; upserts and withdrawals are resolved against the
    DAG's current table.  Returns the nodes visited."""
    if u.op == "delete":
        return dag_delete(dag, u.prefix)
    if u.op == "change":
        return dag_update(dag, u.prefix, u.label)
    return dag_insert(dag, u.prefix, u.label)


def apply_routes(routes: dict[Prefix, int], u: Update) -> None:
    if u.op == "delete":
        del routes[u.prefix]
    else:
        routes[u.prefix] = u.label


# -- metrics -------------------------------------------------------------------

def fib_entropy_report(fib: FibTable, trie: Trie | None = None) -> EntropyReport:
    """Bounds from the leaf-pushed trie of ``fib`` (pass ``trie`` to reuse
    an already normalized one)."""
    if trie is None:
        trie = leaf_push(build_trie(fib), 0)
    hist = Counter(v.label for v in trie.nodes() if v.is_leaf)
    n = sum(hist.values())
    delta = len(hist)
    return entropy_report(n, dict(hist), len(fib), delta=delta,
                          entry_histogram=fib.label_histogram() or None)


def random_addresses(width: int, count: int, seed: int) -> list[int]:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2 ** width, size=count, dtype=np.uint64).tolist()


def read_trace(path: str, width: int = DEFAULT_WIDTH) -> list[int]:
    with open(path, encoding="utf-8") as fh:
        return [parse_address(line, width) for line in fh if line.strip() and not line.startswith("#")]


# -- benchmarks --------------------------------------------------------------

@dataclass
class BenchReport:
    kind: str
    width: int
    barrier: int | None = None
    analytic_bits: int | None = None
    resident_bytes: int | None = None
    build_seconds: float | None = None
    lookups: int = 0
    lookup_seconds: float = 0.0
    lookups_per_sec: float | None = None
    visits_mean: float | None = None
    visits_max: int | None = None
    updates: int = 0
    update_seconds: float = 0.0
    updates_per_sec: float | None = None
    update_visits_mean: float | None = None
    update_visits_max: int | None = None
    nu: float | None = None
    eta: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    CSV_FIELDS = ("kind", "width", "barrier", "analytic_bits", "resident_bytes", "build_seconds",
                  "lookups", "lookups_per_sec", "visits_mean", "visits_max", "updates",
                  "updates_per_sec", "update_visits_mean", "update_visits_max", "nu", "eta")


def _lookup_fns(structure) -> tuple[str, Callable[[int], int | None], Callable[[int, list], object]]:
    """(kind, fast lookup, instrumented lookup) for a structure."""
    if isinstance(structure, PrefixDag):
        return "pdag", structure.lookup, lambda a, c: dag_lookup(structure, a, c)
    if isinstance(structure, XbwTransform):
        return "xbwb", structure.lookup, lambda a, c: xbw_lookup(structure, a, c)
    if isinstance(structure, PdagBlob):
        return "pdag-blob", structure.lookup_fn(), None
    if isinstance(structure, Trie):
        return "trie", structure.lookup, None
    raise TypeError(f"cannot benchmark {type(structure).__name__}")


def validate(structure, fib: FibTable, addresses: Sequence[int]) -> None:
    _, fn, _ = _lookup_fns(structure)
    oracle = LengthIndex(fib)
    for a in addresses:
        got, want = fn(a), oracle.lookup(a)
        if got != want:
            raise BenchError(f"address {a}: structure says {got}, oracle says {want}")


def bench_lookup(structure, fib: FibTable, addresses: Sequence[int] | None = None,
                 lookups: int = 10 ** 7, seed: int = 0, validate_count: int = 1000,
                 visit_sample: int = 10000) -> BenchReport:
    """Time ``lookups`` calls in a tight loop over ``addresses`` (uniform
    random when omitted), after checking ``validate_count`` of them against
    the oracle.  Visit statistics come from an instrumented pass over up to
    ``visit_sample`` addresses."""
    kind, fn, counted = _lookup_fns(structure)
    width = fib.width
    if addresses is None:
        addresses = random_addresses(width, min(lookups, 1 << 16), seed)
    if not addresses:
        raise ValueError("no addresses to look up")
    validate(structure, fib, addresses[:validate_count])
    report = BenchReport(kind=kind, width=width)
    if counted is not None:
        visits: list[int] = []
        for a in addresses[:visit_sample]:
            counted(a, visits)
        report.visits_mean = sum(visits) / len(visits)
        report.visits_max = max(visits)
    reps, rest = divmod(lookups, len(addresses))
    chunks = [addresses] * reps + ([addresses[:rest]] if rest else [])
    t0 = time.perf_counter()
    for chunk in chunks:
        for a in chunk:
            fn(a)
    elapsed = time.perf_counter() - t0
    report.lookups = lookups
    report.lookup_seconds = elapsed
    report.lookups_per_sec = lookups / elapsed if elapsed > 0 else math.inf
    _attach_size(report, structure, fib)
    return report


def _attach_size(report: BenchReport, structure, fib: FibTable) -> None:
    if isinstance(structure, PrefixDag):
        size = dag_size_report(structure)
        report.barrier = structure.barrier
        report.analytic_bits = size.analytic_bits
        report.resident_bytes = size.resident_bytes
    elif isinstance(structure, XbwTransform):
        report.analytic_bits = structure.s_i.size_bits() + structure.s_alpha.size_bits()
        report.resident_bytes = len(structure.to_bytes())
    if report.analytic_bits and len(fib):
        ent = fib_entropy_report(fib).with_measurement(report.analytic_bits)
        report.nu, report.eta = ent.nu, ent.eta


def bench_updates(dag: PrefixDag, updates: Sequence[Update], check_bound: bool = True) -> BenchReport:
    """Apply ``updates`` to ``dag`` in order, timing each and recording the
    visited-node counts."""
    visits = []
    bound = update_visit_bound(dag.width, dag.barrier)
    t0 = time.perf_counter()
    for u in updates:
        visits.append(apply_update(dag, u))
    elapsed = time.perf_counter() - t0
    report = BenchReport(kind="pdag", width=dag.width, barrier=dag.barrier)
    report.updates = len(updates)
    report.update_seconds = elapsed
    if updates:
        report.updates_per_sec = len(updates) / elapsed if elapsed > 0 else math.inf
        report.update_visits_mean = sum(visits) / len(visits)
        report.update_visits_max = max(visits)
        if check_bound and report.update_visits_max > bound:
            worst = update_visit_worst_case(dag.width, dag.barrier)
            report.notes.append(f"visit maximum {report.update_visits_max} exceeds W + 2^(W-lambda) = {bound}"
                                f" (worst case {worst})")
    return report


@dataclass
class SweepRow:
    barrier: int
    node_count: int
    analytic_bits: int
    analytic_bytes: float
    build_seconds: float
    updates: int
    update_seconds_mean: float | None
    update_visits_mean: float | None
    update_visits_max: int | None
    visit_bound: int
    visit_worst_case: int

    def to_dict(self) -> dict:
        return asdict(self)


def sweep_lambda(fib: FibTable, barriers: Iterable[int], updates: Sequence[Update] = ()) -> list[SweepRow]:
    """Size and update cost of the prefix DAG for each barrier level.  Each
    row starts from a fresh build of ``fib``."""
    rows = []
    for lam in barriers:
        t0 = time.perf_counter()
        dag = dag_build(fib, lam)
        build = time.perf_counter() - t0
        size = dag_size_report(dag)
        up = bench_updates(dag, updates) if updates else None
        rows.append(SweepRow(
            barrier=lam, node_count=size.node_count, analytic_bits=size.analytic_bits,
            analytic_bytes=size.analytic_bits / 8, build_seconds=build,
            updates=len(updates),
            update_seconds_mean=(up.update_seconds / up.updates) if up and up.updates else None,
            update_visits_mean=up.update_visits_mean if up else None,
            update_visits_max=up.update_visits_max if up else None,
            visit_bound=update_visit_bound(fib.width, lam),
            visit_worst_case=update_visit_worst_case(fib.width, lam),
        ))
    return rows


# -- storage table -------------------------------------------------------------

def static_row(name: str, fib: FibTable, barrier: int | str = 11) -> dict:
    """One row of the storage table; sizes in KBytes (1000 bytes)."""
    trie = leaf_push(build_trie(fib), 0)
    ent = fib_entropy_report(fib, trie)
    x = xbw_build(trie, delta=max(fib.delta, 1))
    xbits = xbw_size_report(x).bits_entropy
    dag = dag_build(fib, barrier)
    dbits = dag_size_report(dag).analytic_bits
    kb = 8000
    return {
        "name": name, "N": len(fib), "delta": fib.delta, "H0": ent.H0,
        "H0_entries": ent.H0_entries, "n": ent.n, "barrier": dag.barrier,
        "I": ent.info_bound_bits / kb, "E": ent.entropy_bits / kb,
        "XBW-b": xbits / kb, "pDAG": dbits / kb,
        "nu": dbits / ent.entropy_bits,
        "nu_xbwb": xbits / ent.entropy_bits,
        "eta_xbwb": xbits / len(fib) if len(fib) else None,
        "eta_pdag": dbits / len(fib) if len(fib) else None,
    }
