"""Binary prefix trees: construction from a FIB, leaf-pushing and lookup."""

from __future__ import annotations

from collections import Counter, deque
from typing import Iterator, NamedTuple

from fibcomp.fib import INVALID, FibTable, Prefix


class TrieNode:
    __slots__ = ("left", "right", "label")

    def __init__(self, label: int | None = None, left: TrieNode | None = None,
                 right: TrieNode | None = None):
        self.label = label
        self.left = left
        self.right = right

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    def child(self, bit: int) -> TrieNode | None:
        return self.right if bit else self.left

    def __repr__(self):
        return f"TrieNode(label={self.label})"


class TrieStats(NamedTuple):
    t: int
    n: int
    depth: int
    histogram: dict[int, int]


class Trie:
    """Binary trie of depth at most ``width``.

    ``barrier`` is the level leaf-pushing was applied from, or None when the
    trie is still in its raw (as-built) form.  ``normalized`` means fully
    leaf-pushed from the root, i.e. proper and leaf-labeled.
    """

    def __init__(self, root: TrieNode, width: int, barrier: int | None = None):
        self.root = root
        self.width = width
        self.barrier = barrier

    @property
    def normalized(self) -> bool:
        return self.barrier == 0

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def leaf_count(self) -> int:
        return sum(1 for v in self.nodes() if v.is_leaf)

    def nodes(self) -> Iterator[TrieNode]:
        """Preorder traversal."""
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            if v.right is not None:
                stack.append(v.right)
            if v.left is not None:
                stack.append(v.left)

    def levels(self) -> Iterator[tuple[int, TrieNode]]:
        """Breadth-first (level-order) traversal yielding (depth, node)."""
        queue = deque([(0, self.root)])
        while queue:
            d, v = queue.popleft()
            yield d, v
            if v.left is not None:
                queue.append((d + 1, v.left))
            if v.right is not None:
                queue.append((d + 1, v.right))

    def copy(self) -> Trie:
        return Trie(copy_subtrie(self.root), self.width, self.barrier)

    def lookup(self, address: int) -> int | None:
        return trie_lookup(self, address)

    def to_dot(self) -> str:
        """Graphviz dump for debugging."""
        out = ["digraph trie {", "  node [shape=circle];"]
        ids: dict[int, int] = {}
        for v in self.nodes():
            ids[id(v)] = len(ids)
            text = "" if v.label is None else ("⊥" if v.label == INVALID else str(v.label))
            out.append(f'  n{ids[id(v)]} [label="{text}"];')
        for v in self.nodes():
            for bit, c in ((0, v.left), (1, v.right)):
                if c is not None:
                    out.append(f'  n{ids[id(v)]} -> n{ids[id(c)]} [label="{bit}"];')
        out.append("}")
        return "\n".join(out) + "\n"


def copy_subtrie(node: TrieNode) -> TrieNode:
    root = TrieNode(node.label)
    stack = [(node, root)]
    while stack:
        src, dst = stack.pop()
        if src.left is not None:
            dst.left = TrieNode(src.left.label)
            stack.append((src.left, dst.left))
        if src.right is not None:
            dst.right = TrieNode(src.right.label)
            stack.append((src.right, dst.right))
    return root


def insert_route(root: TrieNode, prefix: Prefix, label: int) -> TrieNode:
    """Create the path to ``prefix`` and label its node; returns the node."""
    v = root
    for q in range(prefix.length):
        if prefix.bit(q):
            if v.right is None:
                v.right = TrieNode()
            v = v.right
        else:
            if v.left is None:
                v.left = TrieNode()
            v = v.left
    v.label = label
    return v


def find_node(root: TrieNode, prefix: Prefix) -> TrieNode | None:
    v = root
    for q in range(prefix.length):
        v = v.right if prefix.bit(q) else v.left
        if v is None:
            return None
    return v


def remove_route(root: TrieNode, prefix: Prefix) -> None:
    """Clear the label at ``prefix`` and prune nodes left without purpose.

    The root is never removed.
    """
    path = [root]
    v = root
    for q in range(prefix.length):
        v = v.right if prefix.bit(q) else v.left
        if v is None:
            raise KeyError(prefix)
        path.append(v)
    v.label = None
    for q in range(prefix.length, 0, -1):
        v = path[q]
        if v.label is not None or not v.is_leaf:
            break
        parent = path[q - 1]
        if prefix.bit(q - 1):
            parent.right = None
        else:
            parent.left = None


def build_trie(fib: FibTable) -> Trie:
    """Binary prefix tree with one labeled node per FIB entry."""
    root = TrieNode()
    for prefix, label in fib.routes.items():
        insert_route(root, prefix, label)
    return Trie(root, fib.width)


def push_subtrie(node: TrieNode, inherited: int) -> TrieNode:
    """Leaf-push the sub-trie at ``node`` in place and return its new root.

    Labels move down to the leaves (missing children become leaves carrying
    the inherited label) and parents of two identically labeled leaves
    collapse into a leaf.  ``inherited`` applies when ``node`` is unlabeled.
    """
    label = node.label if node.label is not None else inherited
    if node.is_leaf:
        node.label = label
        return node
    left = push_subtrie(node.left, label) if node.left is not None else TrieNode(label)
    right = push_subtrie(node.right, label) if node.right is not None else TrieNode(label)
    if left.is_leaf and right.is_leaf and left.label == right.label:
        node.left = node.right = None
        node.label = left.label
        return node
    node.left, node.right, node.label = left, right, None
    return node


def leaf_push(trie: Trie, from_level: int = 0) -> Trie:
    """Return a copy normalized from depth ``from_level`` downwards.

    Each node at that depth is pushed using its own label as the default, or
    the invalid label when it has none.  Nodes above the level are untouched.
    """
    if not 0 <= from_level <= trie.width:
        raise ValueError(f"barrier {from_level} outside [0, {trie.width}]")
    out = trie.copy()
    if from_level == 0:
        out.root = push_subtrie(out.root, INVALID)
    else:
        frontier = [out.root]
        for _ in range(from_level - 1):
            frontier = [c for v in frontier for c in (v.left, v.right) if c is not None]
        for v in frontier:
            if v.left is not None:
                v.left = push_subtrie(v.left, INVALID)
            if v.right is not None:
                v.right = push_subtrie(v.right, INVALID)
    out.barrier = from_level
    return out


def trie_lookup(trie: Trie, address: int) -> int | None:
    """Walk the address bits MSB first; the last label seen wins.

    Invalid labels never override a label inherited from above, so a trie
    pushed from a barrier below the root stays forwarding-equivalent.
    """
    v = trie.root
    best = None
    shift = trie.width - 1
    while v is not None:
        if v.label:
            best = v.label
        if shift < 0:
            break
        v = v.right if (address >> shift) & 1 else v.left
        shift -= 1
    return best


def stats(trie: Trie) -> TrieStats:
    t = n = depth = 0
    hist: Counter[int] = Counter()
    for d, v in trie.levels():
        t += 1
        depth = max(depth, d)
        if v.is_leaf:
            n += 1
            if v.label is not None:
                hist[v.label] += 1
    return TrieStats(t, n, depth, dict(hist))


def check_proper(trie: Trie) -> None:
    """Raise ValueError unless P1 (full binary) and P2 (labels exactly on
    leaves) hold."""
    for v in trie.nodes():
        if v.is_leaf:
            if v.label is None:
                raise ValueError("unlabeled leaf")
        elif v.left is None or v.right is None:
            raise ValueError("interior node with a single child")
        elif v.label is not None:
            raise ValueError("labeled interior node")
