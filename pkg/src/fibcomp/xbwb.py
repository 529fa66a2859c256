"""Level-order succinct encoding of a proper leaf-labeled trie.

The shape goes into a bitstring (0 = interior, 1 = leaf, breadth-first) and
the leaf labels into a label sequence in the same order.  Children of the
r-th interior node start at position 2r, so a lookup walks the bitstring with
rank alone, and never materializes the tree.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import asdict, dataclass

from fibcomp.entropy import ceil_log2, shannon_entropy
from fibcomp.fib import INVALID, FibTable
from fibcomp.succinct import BitVector, LabelSequence, build_bitvector, build_labelseq
from fibcomp.trie import Trie, TrieNode, build_trie, check_proper, leaf_push

MAGIC = b"XBWB"
VERSION = 1
_HEADER = struct.Struct("<4sHBBIQQ")


class XbwError(ValueError):
    pass


@dataclass
class XbwTransform:
    s_i: BitVector
    s_alpha: LabelSequence
    width: int
    delta: int
    # nodes touched while building, one per trie node
    build_visits: int = 0

    @property
    def t(self) -> int:
        return len(self.s_i)

    @property
    def n(self) -> int:
        return len(self.s_alpha)

    def lookup(self, address: int) -> int | None:
        return xbw_lookup(self, address)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.width, 0, self.delta, self.t, self.n)
        return head + self.s_i.to_bytes() + self.s_alpha.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> XbwTransform:
        if len(data) < _HEADER.size:
            raise XbwError("truncated blob")
        magic, version, width, _, delta, t, n = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise XbwError("not an XBWB blob")
        if version != VERSION:
            raise XbwError(f"unsupported XBWB version {version}")
        s_i, pos = BitVector.from_bytes(data, _HEADER.size)
        s_alpha, pos = LabelSequence.from_bytes(data, pos)
        if len(s_i) != t or len(s_alpha) != n or pos != len(data):
            raise XbwError("blob sizes do not match its header")
        return cls(s_i, s_alpha, width, delta)


def xbw_build(trie: Trie, mode: str = LabelSequence.ENTROPY, delta: int | None = None) -> XbwTransform:
    """Breadth-first serialization of a normalized trie."""
    try:
        check_proper(trie)
    except ValueError as e:
        raise XbwError(f"trie is not normalized: {e}") from None
    bits: list[int] = []
    labels: list[int] = []
    queue = deque([trie.root])
    while queue:
        v = queue.popleft()
        if v.left is None:
            bits.append(1)
            labels.append(v.label)
        else:
            bits.append(0)
            queue.append(v.left)
            queue.append(v.right)
    if delta is None:
        delta = max(labels)
    return XbwTransform(build_bitvector(bits), build_labelseq(labels, mode),
                        trie.width, delta, build_visits=len(bits))


def xbw_lookup(x: XbwTransform, address: int, counter: list[int] | None = None) -> int | None:
    """Longest-prefix match on the encoded trie; ``counter`` (if given)
    receives the number of S_I positions touched."""
    s_i = x.s_i
    access, rank1 = s_i.access, s_i.rank1
    shift = x.width - 1
    i = 1
    touched = 1
    while not access(i):
        r = i - rank1(i)
        i = 2 * r + ((address >> shift) & 1)
        shift -= 1
        touched += 1
    if counter is not None:
        counter.append(touched)
    label = x.s_alpha.access(rank1(i))
    return None if label == INVALID else label


def xbw_decode(x: XbwTransform) -> Trie:
    """Inverse transform: rebuild the trie level by level."""
    root = TrieNode()
    queue = deque([root])
    leaf = 0
    for q in range(1, x.t + 1):
        v = queue.popleft()
        if x.s_i.access(q):
            leaf += 1
            v.label = x.s_alpha.access(leaf)
        else:
            v.left, v.right = TrieNode(), TrieNode()
            queue.append(v.left)
            queue.append(v.right)
    if queue:
        raise XbwError("S_I ends before every node is resolved")
    return Trie(root, x.width, barrier=0)


@dataclass
class XbwSizeReport:
    t: int
    n: int
    delta: int
    H0: float
    bits_packed: int
    bits_entropy: int
    info_bound_bits: int
    entropy_bound_bits: float
    overhead_packed: float
    overhead_entropy: float

    def to_dict(self) -> dict:
        return asdict(self)


def xbw_size_report(x: XbwTransform) -> XbwSizeReport:
    """Measured bits in both label encodings against 2n + n lg(delta) and
    2n + n H0.  delta here counts the symbols in S_alpha, the invalid label
    included when present."""
    labels = list(x.s_alpha)
    counts = x.s_alpha.counts
    delta = len(counts)
    h0 = shannon_entropy(counts)
    shape = x.s_i.size_bits()
    if x.s_alpha.mode == LabelSequence.PACKED:
        packed = x.s_alpha
        entropy = build_labelseq(labels, LabelSequence.ENTROPY)
    else:
        entropy = x.s_alpha
        packed = build_labelseq(labels, LabelSequence.PACKED)
    info = 2 * x.n + x.n * ceil_log2(delta)
    ent = 2 * x.n + x.n * h0
    bits_packed = shape + packed.size_bits()
    bits_entropy = shape + entropy.size_bits()
    return XbwSizeReport(
        t=x.t, n=x.n, delta=delta, H0=h0,
        bits_packed=bits_packed, bits_entropy=bits_entropy,
        info_bound_bits=info, entropy_bound_bits=ent,
        overhead_packed=bits_packed / info if info else float("inf"),
        overhead_entropy=bits_entropy / ent,
    )


def xbw_rebuild(fib: FibTable, mode: str = LabelSequence.ENTROPY) -> XbwTransform:
    """Full rebuild, the update strategy for this static encoding."""
    return xbw_build(leaf_push(build_trie(fib), 0), mode, delta=max(fib.delta, 1))
