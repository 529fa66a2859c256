"""Static string indexes: a rank/select bitvector and a label sequence that
answers access/rank/select either from fixed-width packed symbols or from a
Huffman-shaped wavelet tree.

Positions are one-based and ranks are inclusive: ``rank(s, q)`` counts the
occurrences of ``s`` in ``S[1..q]`` and ``rank(s, 0) == 0``.
"""

from __future__ import annotations

import heapq
import struct
from array import array
from collections import Counter
from typing import Iterable, Sequence

from fibcomp.entropy import ceil_log2

MAGIC = b"SUCC"
VERSION = 1
MODE_BITS, MODE_PACKED, MODE_HUFFMAN = 0, 1, 2
_HEADER = struct.Struct("<4sHBBQI")

DEFAULT_BLOCK = 512
# absolute counts are kept per superblock, block counts relative to it
SUPERBLOCK = 1 << 16
SUPER_COUNTER_BITS = 64
BLOCK_COUNTER_BITS = 16


class SuccinctError(ValueError):
    pass


def _header(mode: int, length: int, block: int) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, mode, 0, length, block)


def _read_header(buf: memoryview, offset: int, mode: int) -> tuple[int, int, int]:
    magic, version, got_mode, _, length, block = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise SuccinctError("bad magic")
    if version != VERSION:
        raise SuccinctError(f"unsupported version {version}")
    if got_mode != mode:
        raise SuccinctError(f"expected mode {mode}, found {got_mode}")
    return length, block, offset + _HEADER.size


def _bits_to_int(bits) -> tuple[int, int]:
    """(value, length) with bit i of the input at bit position i."""
    if isinstance(bits, str):
        s = bits
    else:
        s = "".join("1" if b else "0" for b in bits)
    if s and not set(s) <= {"0", "1"}:
        raise SuccinctError("bit string may only contain 0 and 1")
    return (int(s[::-1], 2) if s else 0), len(s)


class BitVector:
    """Bitvector with a two-level rank directory.

    Bits live in ``block``-bit chunks; the directory holds an absolute count
    per 64 Ki-bit superblock plus a count relative to it per block, and the
    tail is resolved with a popcount.  select is a binary search over the
    directory followed by a scan of one block.
    """

    __slots__ = ("length", "block", "ones", "_blocks", "_super", "_rel", "_shift")

    def __init__(self, value: int, length: int, block: int = DEFAULT_BLOCK):
        if block % 64 or block <= 0 or SUPERBLOCK % block:
            raise SuccinctError("block size must be a positive multiple of 64 dividing 65536")
        if value >> length:
            raise SuccinctError("value has bits beyond length")
        self.length = length
        self.block = block
        self._shift = (SUPERBLOCK // block).bit_length() - 1
        nblocks = length // block + 1
        raw = value.to_bytes(nblocks * block // 8, "little")
        step = block // 8
        blocks = [int.from_bytes(raw[i:i + step], "little") for i in range(0, len(raw), step)]
        sup: list[int] = []
        rel = array("H")
        total = 0
        base = 0
        for b, word in enumerate(blocks):
            if b & ((1 << self._shift) - 1) == 0:
                sup.append(total)
                base = total
            rel.append(total - base)
            total += word.bit_count()
        self._blocks = blocks
        self._super = sup
        self._rel = rel
        self.ones = total

    def __len__(self):
        return self.length

    def __getitem__(self, q: int) -> int:
        return self.access(q)

    def __eq__(self, other):
        return (isinstance(other, BitVector) and self.length == other.length
                and self._blocks == other._blocks)

    def __iter__(self):
        for q in range(1, self.length + 1):
            yield self.access(q)

    def to_int(self) -> int:
        value = 0
        for b in reversed(self._blocks):
            value = (value << self.block) | b
        return value

    def to_str(self) -> str:
        return "".join(str(b) for b in self)

    @property
    def zeros(self) -> int:
        return self.length - self.ones

    def access(self, q: int) -> int:
        if not 1 <= q <= self.length:
            raise IndexError(f"position {q} outside [1, {self.length}]")
        q -= 1
        return (self._blocks[q // self.block] >> (q % self.block)) & 1

    def rank1(self, q: int) -> int:
        if not 0 <= q <= self.length:
            raise IndexError(f"rank position {q} outside [0, {self.length}]")
        b, r = divmod(q, self.block)
        c = self._super[b >> self._shift] + self._rel[b]
        if r:
            c += (self._blocks[b] & ((1 << r) - 1)).bit_count()
        return c

    def rank0(self, q: int) -> int:
        return q - self.rank1(q)

    def rank(self, bit: int, q: int) -> int:
        return self.rank1(q) if bit else q - self.rank1(q)

    def _ones_before_block(self, b: int) -> int:
        return self._super[b >> self._shift] + self._rel[b]

    def select(self, bit: int, k: int) -> int:
        """Position of the k-th occurrence of ``bit``."""
        total = self.ones if bit else self.zeros
        if not 1 <= k <= total:
            raise IndexError(f"select({bit}, {k}) with {total} occurrences")
        block = self.block
        lo, hi = 0, len(self._blocks) - 1
        # last block whose preceding count is < k
        while lo < hi:
            mid = (lo + hi + 1) // 2
            before = self._ones_before_block(mid)
            if not bit:
                before = mid * block - before
            if before < k:
                lo = mid
            else:
                hi = mid - 1
        before = self._ones_before_block(lo)
        if not bit:
            before = lo * block - before
        word = self._blocks[lo]
        if not bit:
            word = ~word & ((1 << block) - 1)
        need = k - before
        for i in range(block):
            if (word >> i) & 1:
                need -= 1
                if need == 0:
                    return lo * block + i + 1
        raise AssertionError("rank directory inconsistent")

    def select1(self, k: int) -> int:
        return self.select(1, k)

    def select0(self, k: int) -> int:
        return self.select(0, k)

    def payload_bits(self) -> int:
        return -(-self.length // 64) * 64

    def directory_bits(self) -> int:
        return len(self._super) * SUPER_COUNTER_BITS + len(self._rel) * BLOCK_COUNTER_BITS

    def size_bits(self) -> int:
        return self.payload_bits() + self.directory_bits()

    def to_bytes(self) -> bytes:
        nwords = -(-self.length // 64)
        return _header(MODE_BITS, self.length, self.block) + self.to_int().to_bytes(nwords * 8, "little")

    @classmethod
    def from_bytes(cls, data: bytes | memoryview, offset: int = 0) -> tuple[BitVector, int]:
        buf = memoryview(data)
        length, block, pos = _read_header(buf, offset, MODE_BITS)
        nbytes = -(-length // 64) * 8
        value = int.from_bytes(buf[pos:pos + nbytes], "little")
        return cls(value, length, block), pos + nbytes


def build_bitvector(bits: Iterable[int] | str, block: int = DEFAULT_BLOCK) -> BitVector:
    value, length = _bits_to_int(bits)
    if length == 0:
        raise SuccinctError("empty bitvector")
    return BitVector(value, length, block)


# -- label sequences ---------------------------------------------------------

def huffman_code(counts: dict[int, int]) -> dict[int, str]:
    """Canonical-tiebreak Huffman code: repeatedly merge the two lightest
    subtrees, ties broken by the smaller minimum symbol; the lighter one
    becomes the 0-branch."""
    if not counts:
        return {}
    if len(counts) == 1:
        return {next(iter(counts)): ""}
    heap = [(c, s, s) for s, c in counts.items()]
    heapq.heapify(heap)
    while len(heap) > 1:
        c0, m0, t0 = heapq.heappop(heap)
        c1, m1, t1 = heapq.heappop(heap)
        heapq.heappush(heap, (c0 + c1, min(m0, m1), (t0, t1)))
    codes: dict[int, str] = {}
    stack = [(heap[0][2], "")]
    while stack:
        tree, prefix = stack.pop()
        if isinstance(tree, tuple):
            stack.append((tree[0], prefix + "0"))
            stack.append((tree[1], prefix + "1"))
        else:
            codes[tree] = prefix
    return codes


class _WaveletNode:
    __slots__ = ("bv", "children")

    def __init__(self, bv: BitVector, children: list):
        self.bv = bv
        self.children = children


class LabelSequence:
    """A sequence over a small integer alphabet with access/rank/select."""

    PACKED = "packed"
    ENTROPY = "entropy"

    def __init__(self, symbols: Sequence[int], mode: str = ENTROPY, block: int = DEFAULT_BLOCK):
        if len(symbols) == 0:
            raise SuccinctError("empty label sequence")
        if mode not in (self.PACKED, self.ENTROPY):
            raise SuccinctError(f"unknown mode {mode!r}")
        if min(symbols) < 0:
            raise SuccinctError("symbols must be non-negative")
        self.mode = mode
        self.block = block
        self.length = len(symbols)
        self.counts = dict(sorted(Counter(symbols).items()))
        self.alphabet = list(self.counts)
        if mode == self.PACKED:
            index = {s: i for i, s in enumerate(self.alphabet)}
            self.width = ceil_log2(len(self.alphabet))
            self._packed = array("H", (index[s] for s in symbols))
        else:
            self.codes = huffman_code(self.counts)
            self._root = self._build_wavelet(list(symbols), "")
            self._paths = {s: self._path(code) for s, code in self.codes.items()}

    def _build_wavelet(self, symbols: list[int], prefix: str):
        # symbols under this node share ``prefix``; a full code means a leaf
        sample = symbols[0]
        if self.codes[sample] == prefix:
            return sample
        depth = len(prefix)
        bits = [self.codes[s][depth] == "1" for s in symbols]
        bv = build_bitvector(bits, self.block)
        left = [s for s, b in zip(symbols, bits) if not b]
        right = [s for s, b in zip(symbols, bits) if b]
        return _WaveletNode(bv, [self._build_wavelet(left, prefix + "0"),
                                 self._build_wavelet(right, prefix + "1")])

    def _path(self, code: str) -> list[tuple[_WaveletNode, int]]:
        node = self._root
        path = []
        for ch in code:
            b = 1 if ch == "1" else 0
            path.append((node, b))
            node = node.children[b]
        return path

    def __len__(self):
        return self.length

    def __iter__(self):
        for q in range(1, self.length + 1):
            yield self.access(q)

    def __eq__(self, other):
        return (isinstance(other, LabelSequence) and self.mode == other.mode
                and list(self) == list(other))

    def access(self, q: int) -> int:
        if not 1 <= q <= self.length:
            raise IndexError(f"position {q} outside [1, {self.length}]")
        if self.mode == self.PACKED:
            return self.alphabet[self._packed[q - 1]]
        node = self._root
        while type(node) is _WaveletNode:
            bv = node.bv
            b = bv.access(q)
            q = bv.rank1(q) if b else q - bv.rank1(q)
            node = node.children[b]
        return node

    def rank(self, s: int, q: int) -> int:
        if not 0 <= q <= self.length:
            raise IndexError(f"rank position {q} outside [0, {self.length}]")
        if s not in self.counts:
            return 0
        if self.mode == self.PACKED:
            i = self.alphabet.index(s)
            return sum(1 for x in self._packed[:q] if x == i)
        for node, b in self._paths[s]:
            q = node.bv.rank(b, q)
            if q == 0:
                return 0
        return q

    def select(self, s: int, k: int) -> int:
        total = self.counts.get(s, 0)
        if not 1 <= k <= total:
            raise IndexError(f"select({s}, {k}) with {total} occurrences")
        if self.mode == self.PACKED:
            i = self.alphabet.index(s)
            for pos, x in enumerate(self._packed, 1):
                if x == i:
                    k -= 1
                    if k == 0:
                        return pos
        for node, b in reversed(self._paths[s]):
            k = node.bv.select(b, k)
        return k

    def _bitvectors(self) -> list[BitVector]:
        out = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if type(node) is _WaveletNode:
                out.append(node.bv)
                stack.append(node.children[1])
                stack.append(node.children[0])
        return out

    def table_bits(self) -> int:
        # symbol id and occurrence count per alphabet entry
        return len(self.alphabet) * 64

    def size_bits(self) -> int:
        if self.mode == self.PACKED:
            return -(-self.length * self.width // 64) * 64 + self.table_bits()
        return sum(bv.size_bits() for bv in self._bitvectors()) + self.table_bits()

    def to_bytes(self) -> bytes:
        if self.mode == self.PACKED:
            out = [_header(MODE_PACKED, self.length, self.block)]
        else:
            out = [_header(MODE_HUFFMAN, self.length, self.block)]
        out.append(struct.pack("<I", len(self.alphabet)))
        out.extend(struct.pack("<IQ", s, c) for s, c in self.counts.items())
        if self.mode == self.PACKED:
            value = 0
            for i in reversed(self._packed):
                value = (value << self.width) | i
            nwords = -(-self.length * self.width // 64)
            out.append(struct.pack("<B", self.width))
            out.append(value.to_bytes(nwords * 8, "little"))
        else:
            out.extend(bv.to_bytes() for bv in self._bitvectors())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes | memoryview, offset: int = 0) -> tuple[LabelSequence, int]:
        buf = memoryview(data)
        magic, version, mode, _, length, block = _HEADER.unpack_from(buf, offset)
        if magic != MAGIC or version != VERSION or mode not in (MODE_PACKED, MODE_HUFFMAN):
            raise SuccinctError("not a label sequence blob")
        pos = offset + _HEADER.size
        (nsym,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        counts = {}
        for _ in range(nsym):
            s, c = struct.unpack_from("<IQ", buf, pos)
            counts[s] = c
            pos += 12
        self = cls.__new__(cls)
        self.block = block
        self.length = length
        self.counts = counts
        self.alphabet = list(counts)
        if mode == MODE_PACKED:
            self.mode = cls.PACKED
            (self.width,) = struct.unpack_from("<B", buf, pos)
            pos += 1
            nbytes = -(-length * self.width // 64) * 8
            value = int.from_bytes(buf[pos:pos + nbytes], "little")
            pos += nbytes
            mask = (1 << self.width) - 1
            self._packed = array("H", ((value >> (i * self.width)) & mask for i in range(length)))
            return self, pos
        self.mode = cls.ENTROPY
        self.codes = huffman_code(counts)

        def read(prefix):
            nonlocal pos
            leaf = [s for s, code in self.codes.items() if code == prefix]
            if leaf:
                return leaf[0]
            bv, pos = BitVector.from_bytes(buf, pos)
            left = read(prefix + "0")
            right = read(prefix + "1")
            return _WaveletNode(bv, [left, right])

        self._root = read("")
        self._paths = {s: self._path(code) for s, code in self.codes.items()}
        return self, pos


def build_labelseq(symbols: Sequence[int], mode: str = LabelSequence.ENTROPY,
                   block: int = DEFAULT_BLOCK) -> LabelSequence:
    return LabelSequence(symbols, mode, block)
