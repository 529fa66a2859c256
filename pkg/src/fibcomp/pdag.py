"""Prefix DAGs: a binary trie whose bottom part is leaf-pushed and folded so
that identical sub-tries are stored once.

Above the barrier level the structure is an ordinary (labeled, possibly
improper) trie that mirrors the control trie node for node.  Every node at
the barrier depth is leaf-pushed, seeded with its own label or the invalid
label, and folded bottom-up through a hash-consing index keyed by child ids.
Standard trie lookup (last label seen wins) works unchanged because the
coalesced invalid leaf carries no label.

Reference counts are in-degrees: every child pointer and every link from the
region above the barrier (or the root pointer) counts once.  A node whose
count drops to zero leaves the index and releases its children.
"""

from __future__ import annotations

import struct
import sys
import threading
from collections import Counter, deque
from dataclasses import asdict, dataclass, field

import numpy as np

from fibcomp.entropy import ceil_log2, solve_barrier_entropy, shannon_entropy
from fibcomp.fib import INVALID, FibTable, Prefix, parse_fib, serialize_fib
from fibcomp.trie import Trie, TrieNode, build_trie, find_node, insert_route, leaf_push, remove_route

DEFAULT_BARRIER = 11


class DagError(ValueError):
    pass


class DagNode:
    """A DAG node.  ``id`` is None above the barrier, a positive counter for
    shared interior nodes, and minus the label for coalesced leaves (0 for
    the invalid leaf), so the two namespaces never collide."""

    __slots__ = ("id", "left", "right", "label", "refcount")

    def __init__(self, id: int | None, label: int | None = None,
                 left: DagNode | None = None, right: DagNode | None = None):
        self.id = id
        self.label = label
        self.left = left
        self.right = right
        self.refcount = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    def child(self, bit: int) -> DagNode | None:
        return self.right if bit else self.left

    def __repr__(self):
        return f"DagNode(id={self.id}, label={self.label}, refs={self.refcount})"


class SubtrieIndex:
    """Exact map (left id, right id) -> shared interior node."""

    def __init__(self):
        self._nodes: dict[tuple[int, int], DagNode] = {}
        self._next_id = 1

    def __len__(self):
        return len(self._nodes)

    def __iter__(self):
        return iter(self._nodes.values())

    def items(self):
        return self._nodes.items()

    def get(self, left: DagNode, right: DagNode) -> DagNode | None:
        return self._nodes.get((left.id, right.id))

    def put(self, left: DagNode, right: DagNode) -> DagNode:
        key = (left.id, right.id)
        if key in self._nodes:
            raise DagError(f"sub-trie {key} already indexed")
        node = DagNode(self._next_id, None, left, right)
        self._next_id += 1
        self._nodes[key] = node
        return node

    def discard(self, node: DagNode) -> None:
        del self._nodes[(node.left.id, node.right.id)]


class LeafTable:
    """One coalesced leaf per label.  The invalid label's leaf keeps no label
    so that lookups fall back to whatever was seen above it."""

    def __init__(self):
        self._leaves: dict[int, DagNode] = {}

    def __len__(self):
        return len(self._leaves)

    def __iter__(self):
        return iter(self._leaves.values())

    def __contains__(self, label: int):
        return label in self._leaves

    def items(self):
        return self._leaves.items()

    def get(self, label: int) -> DagNode:
        leaf = self._leaves.get(label)
        if leaf is None:
            leaf = DagNode(-label, None if label == INVALID else label)
            self._leaves[label] = leaf
        return leaf

    def discard(self, node: DagNode) -> None:
        del self._leaves[-node.id]


class PrefixDag:
    def __init__(self, width: int, barrier: int, label_names=()):
        self.width = width
        self.barrier = barrier
        self.label_names = tuple(label_names)
        self.control = Trie(TrieNode(), width)
        self.routes: dict[Prefix, int] = {}
        self.index = SubtrieIndex()
        self.leaves = LeafTable()
        self.root: DagNode | None = None
        self.build_visits = 0
        # writers take this; lookups never do (see swap order in _apply)
        self.write_lock = threading.Lock()

    # -- reference counting --------------------------------------------------

    def _incref(self, node: DagNode) -> None:
        node.refcount += 1

    def _decref(self, node: DagNode) -> None:
        stack = [node]
        while stack:
            v = stack.pop()
            v.refcount -= 1
            if v.refcount:
                continue
            if v.left is None:
                self.leaves.discard(v)
            else:
                self.index.discard(v)
                stack.append(v.left)
                stack.append(v.right)

    def _intern(self, left: DagNode, right: DagNode) -> DagNode:
        node = self.index.get(left, right)
        if node is None:
            node = self.index.put(left, right)
            left.refcount += 1
            right.refcount += 1
        return node

    def _fold(self, node: TrieNode, inherited: int, visits: list[int]) -> DagNode:
        """Leaf-push and fold the control sub-trie at ``node``; the result is
        canonical but not yet linked (its refcount excludes the caller)."""
        visits[0] += 1
        label = node.label if node.label is not None else inherited
        if node.left is None and node.right is None:
            return self.leaves.get(label)
        left = self._fold(node.left, label, visits) if node.left is not None else self.leaves.get(label)
        right = self._fold(node.right, label, visits) if node.right is not None else self.leaves.get(label)
        if left is right and left.left is None:
            return left
        return self._intern(left, right)

    # -- construction --------------------------------------------------------

    def _build(self) -> None:
        visits = [0]
        lam = self.barrier
        if lam == 0:
            self.root = self._fold(self.control.root, INVALID, visits)
            self._incref(self.root)
            self.build_visits = visits[0]
            return

        def mirror(cnode: TrieNode, depth: int) -> DagNode:
            visits[0] += 1
            v = DagNode(None, cnode.label)
            for bit in (0, 1):
                c = cnode.child(bit)
                if c is None:
                    continue
                if depth + 1 == lam:
                    w = self._fold(c, INVALID, visits)
                    self._incref(w)
                else:
                    w = mirror(c, depth + 1)
                if bit:
                    v.right = w
                else:
                    v.left = w
            return v

        self.root = mirror(self.control.root, 0)
        self.build_visits = visits[0]

    # -- queries -------------------------------------------------------------

    @property
    def fib(self) -> FibTable:
        delta = max(self.routes.values(), default=0)
        names = self.label_names
        if len(names) < delta:
            names = names + tuple(range(len(names) + 1, delta + 1))
        return FibTable(self.routes, self.width, names)

    @property
    def delta(self) -> int:
        return max(len(self.label_names), max(self.routes.values(), default=0))

    def lookup(self, address: int) -> int | None:
        v = self.root
        best = None
        shift = self.width - 1
        while v is not None:
            if v.label:
                best = v.label
            if v.left is None and v.right is None:
                break
            v = v.right if (address >> shift) & 1 else v.left
            shift -= 1
        return best

    def above_nodes(self) -> list[tuple[int, DagNode]]:
        """(depth, node) for every node above the barrier, breadth-first."""
        if self.barrier == 0:
            return []
        out = []
        queue = deque([(0, self.root)])
        while queue:
            d, v = queue.popleft()
            out.append((d, v))
            if d + 1 < self.barrier:
                for c in (v.left, v.right):
                    if c is not None:
                        queue.append((d + 1, c))
        return out

    def barrier_links(self) -> list[DagNode]:
        """Roots of the folded region (with multiplicity)."""
        if self.barrier == 0:
            return [self.root]
        out = []
        for d, v in self.above_nodes():
            if d + 1 == self.barrier:
                out.extend(c for c in (v.left, v.right) if c is not None)
        return out

    def shared_nodes(self) -> list[DagNode]:
        """Distinct nodes at or below the barrier, breadth-first."""
        seen: set[int] = set()
        out = []
        queue = deque(self.barrier_links())
        while queue:
            v = queue.popleft()
            if id(v) in seen:
                continue
            seen.add(id(v))
            out.append(v)
            if v.left is not None:
                queue.append(v.left)
                queue.append(v.right)
        return out

    @property
    def node_count(self) -> int:
        return len(self.above_nodes()) + len(self.index) + len(self.leaves)

    def check_invariants(self) -> None:
        """Raise AssertionError unless refcounts equal in-degrees, the index
        and leaf table are injective and hold exactly the live nodes, and the
        region above the barrier mirrors the control trie."""
        indeg: Counter[int] = Counter()
        for w in self.barrier_links():
            indeg[id(w)] += 1
        live = self.shared_nodes()
        for v in live:
            if v.left is not None:
                indeg[id(v.left)] += 1
                indeg[id(v.right)] += 1
        for v in live:
            assert v.refcount == indeg[id(v)], f"{v}: in-degree {indeg[id(v)]}"
        live_ids = {id(v) for v in live}
        keys = set()
        for key, v in self.index.items():
            assert id(v) in live_ids, f"dead node {v} left in index"
            assert key == (v.left.id, v.right.id), f"{v} indexed under {key}"
            assert key not in keys
            keys.add(key)
            assert not (v.left is v.right and v.left.left is None), f"{v} has two equal leaf children"
        for label, leaf in self.leaves.items():
            assert id(leaf) in live_ids, f"dead leaf {leaf} left in leaf table"
            assert leaf.id == -label
            assert leaf.label == (None if label == INVALID else label)
        assert len(self.index) + len(self.leaves) == len(live), "unindexed live node"

        def mirror(c: TrieNode, v: DagNode, depth: int):
            assert c.label == v.label, f"label mismatch at depth {depth}"
            for bit in (0, 1):
                cc, vc = c.child(bit), v.child(bit)
                assert (cc is None) == (vc is None), f"shape mismatch below depth {depth}"
                if cc is not None and depth + 1 < self.barrier:
                    mirror(cc, vc, depth + 1)

        if self.barrier > 0:
            mirror(self.control.root, self.root, 0)

    # -- updates -------------------------------------------------------------

    def _barrier_link(self, prefix: Prefix) -> DagNode | None:
        if self.barrier == 0:
            return self.root
        v = self.root
        for q in range(self.barrier):
            v = v.child(prefix.bit(q))
            if v is None:
                return None
        return v

    def _set_barrier_link(self, prefix: Prefix, node: DagNode | None) -> None:
        lam = self.barrier
        if lam == 0:
            self.root = node
            return
        v = self.root
        for q in range(lam - 1):
            v = v.child(prefix.bit(q))
            if v is None:
                return
        if prefix.bit(lam - 1):
            v.right = node
        else:
            v.left = node

    def _sync_above(self, prefix: Prefix) -> int:
        """Make the path above the barrier match the control trie again."""
        if self.barrier == 0:
            return 0
        c, v = self.control.root, self.root
        v.label = c.label
        visits = 1
        for q in range(min(prefix.length, self.barrier - 1)):
            bit = prefix.bit(q)
            cc, vc = c.child(bit), v.child(bit)
            if cc is None:
                if vc is not None:
                    if bit:
                        v.right = None
                    else:
                        v.left = None
                return visits
            if vc is None:
                vc = DagNode(None)
                if bit:
                    v.right = vc
                else:
                    v.left = vc
            vc.label = cc.label
            c, v = cc, vc
            visits += 1
        return visits

    def _refold_path(self, top: TrieNode, old: DagNode, prefix: Prefix, visits: list[int]) -> DagNode:
        """New folded sub-DAG for the barrier node ``top`` after a change on
        the path to ``prefix``.  Only the path is rebuilt; off-path siblings
        are taken from ``old``, which is still canonical for them."""
        lam = self.barrier
        cpath = [top]
        for q in range(lam, prefix.length):
            c = cpath[-1].child(prefix.bit(q))
            if c is None:
                break
            cpath.append(c)
        depth = lam + len(cpath) - 1
        inherited = INVALID
        for c in cpath[:-1]:
            if c.label is not None:
                inherited = c.label
        siblings = []
        w = old
        for q in range(lam, depth):
            visits[0] += 1
            if w.left is None:
                # uniform region: everything below is this same leaf
                siblings.append(w)
                continue
            bit = prefix.bit(q)
            siblings.append(w.left if bit else w.right)
            w = w.right if bit else w.left
        cur = self._fold(cpath[-1], inherited, visits)
        for q in range(depth - 1, lam - 1, -1):
            sib = siblings[q - lam]
            left, right = (sib, cur) if prefix.bit(q) else (cur, sib)
            cur = left if (left is right and left.left is None) else self._intern(left, right)
        return cur

    def _apply(self, prefix: Prefix, label: int | None) -> int:
        """Set (label) or remove (None) the route at ``prefix``; returns the
        number of nodes visited."""
        lam = self.barrier
        old = self._barrier_link(prefix) if prefix.length >= lam else None
        if label is None:
            remove_route(self.control.root, prefix)
            del self.routes[prefix]
        else:
            insert_route(self.control.root, prefix, label)
            self.routes[prefix] = label
        visits = [self._sync_above(prefix)]
        if prefix.length < lam:
            return visits[0]
        top = find_node(self.control.root, Prefix(lam, prefix.bits >> (self.width - lam) << (self.width - lam), self.width)) \
            if lam else self.control.root
        if top is None:
            if old is not None:
                self._set_barrier_link(prefix, None)
                self._decref(old)
            return visits[0]
        if old is None:
            new = self._fold(top, INVALID, visits)
        else:
            new = self._refold_path(top, old, prefix, visits)
        self._incref(new)
        self._set_barrier_link(prefix, new)
        if old is not None:
            self._decref(old)
        return visits[0]


def dag_build(fib: FibTable, barrier: int | str = DEFAULT_BARRIER) -> PrefixDag:
    """Fold ``fib`` with the given barrier level ("auto" picks it from the
    entropy of the leaf-pushed trie)."""
    if barrier == "auto":
        barrier = auto_barrier(fib)
    if not isinstance(barrier, int) or not 0 <= barrier <= fib.width:
        raise DagError(f"barrier {barrier!r} outside [0, {fib.width}]")
    dag = PrefixDag(fib.width, barrier, fib.label_names)
    dag.control = build_trie(fib)
    dag.routes = dict(fib.routes)
    dag._build()
    return dag


def auto_barrier(fib: FibTable) -> int:
    """Barrier from the entropy bound, or the default when it is undefined."""
    t = leaf_push(build_trie(fib), 0)
    hist: Counter[int] = Counter(v.label for v in t.nodes() if v.is_leaf)
    n = sum(hist.values())
    h0 = shannon_entropy(hist)
    if n < 2 or h0 <= 0:
        return min(DEFAULT_BARRIER, fib.width)
    return min(solve_barrier_entropy(n, h0).lambda_, fib.width)


def dag_lookup(dag: PrefixDag, address: int, counter: list[int] | None = None) -> int | None:
    """Trie walk along the address bits; the last label seen wins.
    ``counter`` (if given) receives the number of nodes visited."""
    v = dag.root
    best = None
    shift = dag.width - 1
    visits = 0
    while v is not None:
        visits += 1
        if v.label:
            best = v.label
        if v.left is None and v.right is None:
            break
        v = v.right if (address >> shift) & 1 else v.left
        shift -= 1
    if counter is not None:
        counter.append(visits)
    return best


def dag_update(dag: PrefixDag, prefix: Prefix, label: int) -> int:
    """Change the label of an existing entry; returns nodes visited."""
    if prefix not in dag.routes:
        raise KeyError(f"no entry for {prefix}")
    _check_label(label)
    with dag.write_lock:
        return dag._apply(prefix, label)


def dag_insert(dag: PrefixDag, prefix: Prefix, label: int) -> int:
    if prefix in dag.routes:
        raise KeyError(f"entry for {prefix} already present")
    if prefix.width != dag.width:
        raise DagError(f"prefix width {prefix.width} != {dag.width}")
    _check_label(label)
    with dag.write_lock:
        return dag._apply(prefix, label)


def dag_delete(dag: PrefixDag, prefix: Prefix) -> int:
    if prefix not in dag.routes:
        raise KeyError(f"no entry for {prefix}")
    with dag.write_lock:
        return dag._apply(prefix, None)


def _check_label(label: int) -> None:
    if not isinstance(label, int) or label < 1:
        raise DagError(f"label must be a positive integer, got {label!r}")


def update_visit_bound(width: int, barrier: int) -> int:
    """The nominal per-update visit budget W + 2**(W - barrier)."""
    return width + 2 ** (width - barrier)


def update_visit_worst_case(width: int, barrier: int) -> int:
    """What one update can actually visit: the walk down to the barrier plus
    a refold of a complete sub-trie hanging from it.  Above the nominal
    budget by 2**(W - barrier) - (W - barrier) - 1, which is zero only for
    barrier >= W - 1."""
    return barrier + 2 ** (width - barrier + 1) - 1


# -- size accounting ---------------------------------------------------------

@dataclass
class DagSizeReport:
    width: int
    barrier: int
    delta: int
    above_nodes: int
    interior_nodes: int
    leaf_nodes: int
    node_count: int
    nodes_by_level: dict[int, int]
    pointer_bits: int
    label_bits: int
    analytic_bits: int
    resident_bytes: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nodes_by_level"] = {str(k): v for k, v in sorted(self.nodes_by_level.items())}
        return d


def dag_size_report(dag: PrefixDag) -> DagSizeReport:
    """Analytic size: above the barrier one child pointer plus one label per
    node (children sit next to each other); at and below it two pointers per
    interior node and a label per coalesced leaf.  Pointers are wide enough
    to address every node."""
    above = dag.above_nodes()
    levels: Counter[int] = Counter(d for d, _ in above)
    seen: set[int] = set()
    queue = deque((dag.barrier, w) for w in dag.barrier_links())
    while queue:
        d, v = queue.popleft()
        if id(v) in seen:
            continue
        seen.add(id(v))
        levels[d] += 1
        if v.left is not None:
            queue.append((d + 1, v.left))
            queue.append((d + 1, v.right))
    n_above, n_int, n_leaf = len(above), len(dag.index), len(dag.leaves)
    total = n_above + n_int + n_leaf
    ptr = max(1, ceil_log2(total))
    lab = max(1, ceil_log2(dag.delta))
    bits = n_above * (ptr + lab) + n_int * 2 * ptr + n_leaf * lab
    resident = total * sys.getsizeof(DagNode(None)) + sys.getsizeof(dag.index._nodes) \
        + sys.getsizeof(dag.leaves._leaves)
    return DagSizeReport(
        width=dag.width, barrier=dag.barrier, delta=dag.delta,
        above_nodes=n_above, interior_nodes=n_int, leaf_nodes=n_leaf, node_count=total,
        nodes_by_level=dict(levels), pointer_bits=ptr, label_bits=lab,
        analytic_bits=bits, resident_bytes=resident,
    )


# -- flat blob ---------------------------------------------------------------

MAGIC = b"PDAG"
VERSION = 1
NIL = 0xFFFFFFFF
# above every node index a 32-bit record can hold
LEAF_TAG = 1 << 32
JUMP_CAP = 16
_HEADER = struct.Struct("<4sHBBIIQ")


@dataclass
class PdagBlob:
    """Array form of a prefix DAG.

    The first ``k`` levels are collapsed into a 2**k-entry jump table of
    (node index, label inherited from those levels); the remaining nodes are
    (left, right, label) records, NIL for a missing child and 0 for no
    label.  An optional trailer carries the control FIB dump so the blob can
    be turned back into an updatable DAG.
    """

    width: int
    barrier: int
    delta: int
    jump_bits: int
    jump_node: list[int]
    jump_label: list[int]
    left: list[int]
    right: list[int]
    label: list[int]
    fib_dump: bytes = b""
    _kids: list = field(default_factory=list, init=False, repr=False, compare=False)
    _flat: tuple | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def node_count(self) -> int:
        return len(self.left)

    def __post_init__(self):
        # interleaved children: kids[2 * i + bit]
        kids = [NIL] * (2 * len(self.left))
        kids[0::2] = self.left
        kids[1::2] = self.right
        self._kids = kids
        self._flat = None
        if self.jump_bits == self.barrier:
            self._flat = self._tag_leaves()

    def _tag_leaves(self):
        """When the table covers every level above the barrier, only leaves
        below it carry labels and every interior node has two children.
        Leaves are then replaced by LEAF_TAG + label in the child arrays so
        the walk needs one list access per level."""
        label, left = self.label, self.left

        def tag(i):
            if i == NIL:
                return LEAF_TAG
            if left[i] == NIL:
                return LEAF_TAG + label[i]
            return i

        kids = [tag(i) for i in self._kids]
        entries = [(tag(i), lab) for i, lab in zip(self.jump_node, self.jump_label)]
        return kids, entries

    def lookup(self, address: int) -> int | None:
        return self.lookup_fn()(address)

    def lookup_fn(self):
        """A lookup function with the arrays bound as locals, for tight loops."""
        k = self.jump_bits
        drop = self.width - k
        top = self.width - k - 1
        if self._flat is not None:
            kids, entries = self._flat

            def lookup(address: int) -> int | None:
                off, best = entries[address >> drop]
                shift = top
                while off < LEAF_TAG:
                    off = kids[2 * off + ((address >> shift) & 1)]
                    shift -= 1
                return (off - LEAF_TAG) or best or None
            return lookup

        jump_node, jump_label = self.jump_node, self.jump_label
        kids, label = self._kids, self.label

        def lookup(address: int) -> int | None:
            e = address >> drop
            off = jump_node[e]
            best = jump_label[e]
            shift = top
            while off != NIL:
                lab = label[off]
                if lab:
                    best = lab
                if shift < 0:
                    break
                off = kids[2 * off + ((address >> shift) & 1)]
                shift -= 1
            return best or None
        return lookup

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.width, self.barrier, self.delta,
                            self.jump_bits, self.node_count)
        table = np.empty((len(self.jump_node), 2), dtype="<u4")
        table[:, 0] = self.jump_node
        table[:, 1] = self.jump_label
        nodes = np.empty((self.node_count, 3), dtype="<u4")
        nodes[:, 0] = self.left
        nodes[:, 1] = self.right
        nodes[:, 2] = self.label
        trailer = struct.pack("<Q", len(self.fib_dump)) + self.fib_dump
        return head + table.tobytes() + nodes.tobytes() + trailer

    @classmethod
    def from_bytes(cls, data: bytes) -> PdagBlob:
        if len(data) < _HEADER.size:
            raise DagError("truncated blob")
        magic, version, width, barrier, delta, k, count = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise DagError("not a PDAG blob")
        if version != VERSION:
            raise DagError(f"unsupported PDAG version {version}")
        pos = _HEADER.size
        need = pos + (1 << k) * 8 + count * 12 + 8
        if len(data) < need:
            raise DagError("truncated blob")
        table = np.frombuffer(data, dtype="<u4", count=(1 << k) * 2, offset=pos).reshape(-1, 2)
        pos += table.nbytes
        nodes = np.frombuffer(data, dtype="<u4", count=count * 3, offset=pos).reshape(-1, 3)
        pos += nodes.nbytes
        (flen,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        if len(data) != pos + flen:
            raise DagError("blob length does not match its header")
        return cls(width, barrier, delta, k,
                   table[:, 0].tolist(), table[:, 1].tolist(),
                   nodes[:, 0].tolist(), nodes[:, 1].tolist(), nodes[:, 2].tolist(),
                   bytes(data[pos:pos + flen]))

    def to_dag(self) -> PrefixDag:
        if not self.fib_dump:
            raise DagError("blob carries no control FIB")
        return dag_build(parse_fib(self.fib_dump, self.width), self.barrier)


def serialize_pdag(dag: PrefixDag, include_fib: bool = True) -> bytes:
    return pdag_blob(dag, include_fib).to_bytes()


def pdag_blob(dag: PrefixDag, include_fib: bool = True) -> PdagBlob:
    k = min(dag.barrier, JUMP_CAP)
    jump_nodes: list[DagNode | None] = []
    jump_labels: list[int] = []
    # walk the top k levels once per table slot, breadth-first by prefix
    frontier: list[tuple[DagNode | None, int]] = [(dag.root, 0)]
    for _ in range(k):
        nxt = []
        for v, best in frontier:
            if v is None:
                nxt.append((None, best))
                nxt.append((None, best))
                continue
            if v.label:
                best = v.label
            nxt.append((v.left, best))
            nxt.append((v.right, best))
        frontier = nxt
    order: dict[int, int] = {}
    nodes: list[DagNode] = []

    def number(v: DagNode | None) -> int:
        if v is None:
            return NIL
        i = order.get(id(v))
        if i is None:
            i = order[id(v)] = len(nodes)
            nodes.append(v)
        return i

    for v, best in frontier:
        jump_nodes.append(number(v))
        jump_labels.append(best)
    left, right, label = [], [], []
    i = 0
    while i < len(nodes):
        v = nodes[i]
        left.append(number(v.left))
        right.append(number(v.right))
        label.append(v.label or 0)
        i += 1
    dump = serialize_fib(dag.fib) if include_fib else b""
    return PdagBlob(dag.width, dag.barrier, dag.delta, k, jump_nodes, jump_labels,
                    left, right, label, dump)
