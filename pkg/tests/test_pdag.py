import random
import threading

import pytest
from hypothesis import given, strategies as st

from conftest import fib_tables, random_fib, random_prefix
from fibcomp.entropy import solve_barrier_compact
from fibcomp.fib import INVALID, FibTable, Prefix, oracle_lookup, parse_fib, parse_prefix
from fibcomp.pdag import (DagError, PdagBlob, auto_barrier, dag_build, dag_delete, dag_insert, dag_lookup,
                          dag_size_report, dag_update, pdag_blob, serialize_pdag, update_visit_bound,
                          update_visit_worst_case)
from fibcomp.trie import build_trie, trie_lookup
from fibcomp.workbench import gen_string_model


def canonical_fold_count(fib, barrier):
    """Node count of the maximally shared DAG, from structural tuples."""
    distinct = set()

    def fold(node, inherited):
        if node is None:
            t = ("leaf", inherited)
        else:
            lab = node.label or inherited
            if node.left is None and node.right is None:
                t = ("leaf", lab)
            else:
                left, right = fold(node.left, lab), fold(node.right, lab)
                t = left if left == right and left[0] == "leaf" else ("node", left, right)
        distinct.add(t)
        return t

    above = 0

    def walk(node, depth):
        nonlocal above
        if node is None:
            return
        if depth == barrier:
            fold(node, INVALID)
            return
        above += 1
        walk(node.left, depth + 1)
        walk(node.right, depth + 1)

    walk(build_trie(fib).root, 0)
    return above + len(distinct)


def test_shared_full_fold(shared):
    dag = dag_build(shared, 0)
    assert dag.node_count == 7 == canonical_fold_count(shared, 0)
    assert dag.node_count < 15
    # the sub-tries under 0/1 and 11/2 are one node reached along two paths
    zero = dag.root.left
    one_one = dag.root.right.right
    assert zero is one_one and zero.refcount == 2
    dag.check_invariants()


@pytest.mark.parametrize("barrier", [1, 2])
def test_shared_partial_barriers(shared, barrier):
    dag = dag_build(shared, barrier)
    dag.check_invariants()
    assert dag.node_count == canonical_fold_count(shared, barrier)
    control = build_trie(shared)
    for a in range(16):
        assert dag_lookup(dag, a) == trie_lookup(control, a) == oracle_lookup(shared, a)


def test_default_route_survives_invalid_leaf(shared):
    dag = dag_build(shared, 1)
    assert dag_lookup(dag, 0b0000) == 1
    assert dag.leaves.get(INVALID).label is None


def test_barrier_at_width_keeps_trie(shared):
    dag = dag_build(shared, 4)
    assert len(dag.index) == 0
    control_above = sum(1 for d, _ in build_trie(shared).levels() if d < 4)
    assert len(dag.above_nodes()) == control_above
    assert all(dag_lookup(dag, a) == oracle_lookup(shared, a) for a in range(16))


def test_default_only():
    dag = dag_build(parse_fib("-/0 1\n", 8), 3)
    assert all(dag_lookup(dag, a) == 1 for a in range(256))


def test_invalid_barrier(shared):
    with pytest.raises(DagError):
        dag_build(shared, 5)
    with pytest.raises(DagError):
        dag_build(shared, -1)


def test_auto_barrier_is_in_range(shared):
    assert 0 <= auto_barrier(shared) <= 4
    assert dag_build(shared, "auto").barrier == auto_barrier(shared)


def test_exhaustive_random_fibs_every_barrier():
    rng = random.Random(31)
    for _ in range(100):
        fib = random_fib(rng, 8, rng.randint(0, 60))
        for barrier in range(9):
            dag = dag_build(fib, barrier)
            for a in range(256):
                counter = []
                assert dag_lookup(dag, a, counter) == oracle_lookup(fib, a)
                assert counter[0] <= 9
        dag_build(fib, 0).check_invariants()


@given(fib_tables(width=6), st.integers(0, 6))
def test_fold_is_canonical(fib, barrier):
    dag = dag_build(fib, barrier)
    dag.check_invariants()
    assert dag.node_count == canonical_fold_count(fib, barrier)


def test_full_sharing_never_larger(shared):
    rng = random.Random(4)
    for _ in range(30):
        fib = random_fib(rng, 8, 50)
        assert dag_build(fib, 0).node_count <= dag_build(fib, 8).node_count


# -- updates -----------------------------------------------------------------

def test_default_route_change_touches_only_root(shared):
    dag = dag_build(shared, 2)
    shared_before = [id(v) for v in dag.shared_nodes()]
    visits = dag_update(dag, Prefix(0, 0, 4), 2)
    assert visits == 1
    assert dag.root.label == 2
    assert [id(v) for v in dag.shared_nodes()] == shared_before
    changed = shared.with_routes({**shared.routes, Prefix(0, 0, 4): 2})
    assert all(dag_lookup(dag, a) == oracle_lookup(changed, a) for a in range(16))


def test_noop_update(shared):
    dag = dag_build(shared, 0)
    before = dag.node_count
    dag_update(dag, parse_prefix("01/2", 4), shared.routes[parse_prefix("01/2", 4)])
    assert dag.node_count == before
    assert all(dag_lookup(dag, a) == oracle_lookup(shared, a) for a in range(16))
    dag.check_invariants()


@pytest.mark.parametrize("barrier", [0, 2, 5, 8])
def test_insert_then_delete_restores(barrier):
    rng = random.Random(barrier)
    fib = random_fib(rng, 8, 40)
    dag = dag_build(fib, barrier)
    before = dag.node_count
    p = next(q for q in (random_prefix(rng, 8) for _ in range(1000)) if q not in fib.routes)
    dag_insert(dag, p, 3)
    dag_delete(dag, p)
    dag.check_invariants()
    assert dag.node_count == before
    assert all(dag_lookup(dag, a) == oracle_lookup(fib, a) for a in range(256))


def test_more_specific_insert_flips_only_covered_addresses():
    fib = parse_fib("-/0 1\n0/1 2\n", 8)
    dag = dag_build(fib, 3)
    p = parse_prefix("010110/6", 8)
    dag_insert(dag, p, 3)
    for a in range(256):
        want = 3 if p.matches(a) else oracle_lookup(fib, a)
        assert dag_lookup(dag, a) == want


def test_delete_default_route():
    fib = parse_fib("-/0 1\n01/2 2\n", 8)
    dag = dag_build(fib, 4)
    dag_delete(dag, Prefix(0, 0, 8))
    assert dag_lookup(dag, 0b10000000) is None
    assert dag_lookup(dag, 0b01000000) == 2
    dag.check_invariants()


def test_precondition_errors(shared):
    dag = dag_build(shared, 2)
    with pytest.raises(KeyError):
        dag_update(dag, parse_prefix("0000/4", 4), 1)
    with pytest.raises(KeyError):
        dag_insert(dag, Prefix(0, 0, 4), 1)
    with pytest.raises(KeyError):
        dag_delete(dag, parse_prefix("0000/4", 4))
    with pytest.raises(DagError):
        dag_update(dag, Prefix(0, 0, 4), 0)


def _random_op(rng, dag, width, delta=4):
    p = random_prefix(rng, width)
    label = rng.randint(1, delta)
    if p in dag.routes:
        if rng.random() < 0.5:
            return dag_delete(dag, p)
        return dag_update(dag, p, label)
    return dag_insert(dag, p, label)


@given(fib_tables(width=6, max_entries=20), st.integers(0, 6), st.integers(0, 2 ** 32))
def test_updates_keep_every_invariant(fib, barrier, seed):
    rng = random.Random(seed)
    dag = dag_build(fib, barrier)
    for _ in range(25):
        visits = _random_op(rng, dag, 6)
        assert visits <= update_visit_worst_case(6, barrier)
        dag.check_invariants()
        current = dag.fib
        assert dag.node_count == canonical_fold_count(current, barrier)
        for a in range(64):
            assert dag_lookup(dag, a) == oracle_lookup(current, a)


def test_update_sequence_matches_scratch_build():
    rng = random.Random(77)
    fib = random_fib(rng, 12, 500)
    dag = dag_build(fib, 6)
    for _ in range(800):
        _random_op(rng, dag, 12)
    dag.check_invariants()
    scratch = dag_build(dag.fib, 6)
    assert dag.node_count == scratch.node_count
    assert all(dag_lookup(dag, a) == dag_lookup(scratch, a) for a in range(4096))


def test_visit_bound_counterexample():
    # every prefix of length 5 and 6 below 0000/4; inserting 0000/4 itself
    # refolds the complete sub-trie under the barrier
    width, barrier = 6, 4
    routes = {Prefix.from_path(path, 6, width): 1 + path % 2 for path in range(4)}
    routes.update({Prefix.from_path(0, 5, width): 1, Prefix.from_path(1, 5, width): 3})
    dag = dag_build(FibTable(routes, width, range(1, 4)), barrier)
    visits = dag_insert(dag, Prefix.from_path(0, 4, width), 3)
    assert visits == update_visit_worst_case(width, barrier) == 11
    assert visits > update_visit_bound(width, barrier) == 10
    dag.check_invariants()


def test_worst_case_meets_nominal_bound_near_width():
    for width in (8, 16, 32):
        for barrier in range(width + 1):
            gap = update_visit_worst_case(width, barrier) - update_visit_bound(width, barrier)
            assert gap == 2 ** (width - barrier) - (width - barrier) - 1
            assert (gap == 0) == (barrier >= width - 1)


def test_readers_never_see_a_broken_dag():
    rng = random.Random(12)
    fib = random_fib(rng, 10, 200)
    dag = dag_build(fib, 4)
    addresses = [rng.getrandbits(10) for _ in range(100)]
    errors = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            for a in addresses:
                try:
                    got = dag_lookup(dag, a)
                except Exception as e:  # any structural breakage shows up here
                    errors.append(e)
                    return
                if got is not None and not 1 <= got <= 4:
                    errors.append(got)

    threads = [threading.Thread(target=reader) for _ in range(2)]
    for t in threads:
        t.start()
    for _ in range(300):
        _random_op(rng, dag, 10)
    stop.set()
    for t in threads:
        t.join()
    assert errors == []


# -- size accounting ----------------------------------------------------------

def test_size_report_arithmetic(shared):
    rep = dag_size_report(dag_build(shared, 0))
    assert rep.node_count == 7
    assert rep.pointer_bits == 3 and rep.label_bits == 2
    assert rep.analytic_bits == rep.interior_nodes * 2 * 3 + rep.leaf_nodes * 2
    assert sum(rep.nodes_by_level.values()) == rep.node_count
    assert rep.resident_bytes > 0


def test_size_report_at_full_barrier_counts_trie(shared):
    rep = dag_size_report(dag_build(shared, 4))
    assert rep.interior_nodes == 0
    assert rep.above_nodes == sum(1 for d, _ in build_trie(shared).levels() if d < 4)


@pytest.mark.parametrize("width", [12, 14])
def test_complete_string_size_bound(width):
    fib = gen_string_model(width, 0.5, seed=width)
    n = 2 ** width
    barrier = solve_barrier_compact(n, 2).lambda_
    rep = dag_size_report(dag_build(fib, barrier))
    assert rep.analytic_bits <= 4 * n * 1 * 1.15


# -- blob --------------------------------------------------------------------

@pytest.mark.parametrize("barrier", [0, 3, 8, 12, 16])
def test_blob_roundtrip(barrier):
    fib = random_fib(random.Random(barrier), 16, 400)
    dag = dag_build(fib, barrier)
    data = serialize_pdag(dag)
    assert data[:4] == b"PDAG"
    blob = PdagBlob.from_bytes(data)
    assert blob.to_bytes() == data
    assert serialize_pdag(dag) == data
    fn = blob.lookup_fn()
    rng = random.Random(1)
    for _ in range(2000):
        a = rng.getrandbits(16)
        assert fn(a) == blob.lookup(a) == dag_lookup(dag, a)
    again = blob.to_dag()
    assert again.node_count == dag.node_count


def test_blob_exhaustive_small():
    rng = random.Random(6)
    for _ in range(40):
        fib = random_fib(rng, 8, rng.randint(0, 50))
        for barrier in range(9):
            fn = pdag_blob(dag_build(fib, barrier)).lookup_fn()
            assert all(fn(a) == oracle_lookup(fib, a) for a in range(256))


def test_blob_without_fib(shared):
    data = serialize_pdag(dag_build(shared, 2), include_fib=False)
    blob = PdagBlob.from_bytes(data)
    assert all(blob.lookup(a) == oracle_lookup(shared, a) for a in range(16))
    with pytest.raises(DagError):
        blob.to_dag()


def test_blob_errors(shared):
    data = serialize_pdag(dag_build(shared, 2))
    with pytest.raises(DagError):
        PdagBlob.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(DagError):
        PdagBlob.from_bytes(data[:-1])
    with pytest.raises(DagError):
        PdagBlob.from_bytes(data[:8])
