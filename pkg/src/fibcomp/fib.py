"""Tabular FIB model: prefixes, next-hop labels, text dump I/O and a
linear-scan longest-prefix-match used as ground truth by every other module.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Iterable

# Blackhole / invalid next-hop.  Never appears in a parsed table; used inside
# normalized tries for address ranges no entry covers.
INVALID = 0

DEFAULT_WIDTH = 32


class FibError(ValueError):
    """Malformed FIB input or violated table invariant."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Prefix:
    """An address prefix: ``length`` leading bits of a ``width``-bit value.

    ``bits`` holds the full-width network address with host bits zeroed.
    Ordering is by (length, bits), the canonical dump order.
    """

    length: int
    bits: int
    width: int = field(default=DEFAULT_WIDTH, compare=False)

    def __post_init__(self):
        if not 0 <= self.length <= self.width:
            raise FibError(f"prefix length {self.length} outside [0, {self.width}]")
        if self.bits < 0 or self.bits >> self.width:
            raise FibError(f"prefix bits do not fit in {self.width} bits")
        if self.bits & ((1 << (self.width - self.length)) - 1):
            raise FibError("prefix has non-zero bits beyond its length")

    @classmethod
    def from_path(cls, path: int, length: int, width: int = DEFAULT_WIDTH) -> Prefix:
        """Build from the ``length``-bit path value (MSB = first branch)."""
        return cls(length, path << (width - length), width)

    @property
    def path(self) -> int:
        """The prefix as a ``length``-bit integer."""
        return self.bits >> (self.width - self.length)

    def bit(self, q: int) -> int:
        """Bit ``q`` counted from the MSB."""
        return (self.bits >> (self.width - 1 - q)) & 1

    def matches(self, address: int) -> bool:
        shift = self.width - self.length
        return (address >> shift) == (self.bits >> shift)

    def children(self) -> tuple[Prefix, Prefix]:
        if self.length >= self.width:
            raise FibError("cannot split a full-length prefix")
        one = 1 << (self.width - self.length - 1)
        return (Prefix(self.length + 1, self.bits, self.width),
                Prefix(self.length + 1, self.bits | one, self.width))

    def __str__(self):
        if self.length == 0:
            return "-/0"
        if self.width == 32:
            return f"{ipaddress.IPv4Address(self.bits)}/{self.length}"
        return f"{self.path:0{self.length}b}/{self.length}"


def parse_prefix(text: str, width: int = DEFAULT_WIDTH) -> Prefix:
    """Parse ``-/0``, binary (``011/3``) or dotted-quad (``10.0.0.0/8``)."""
    try:
        addr, sep, plen = text.partition("/")
        length = int(plen)
    except ValueError:
        raise FibError(f"bad prefix {text!r}") from None
    if not sep or length < 0:
        raise FibError(f"bad prefix {text!r}")
    if length > width:
        raise FibError(f"prefix length {length} exceeds width {width}")
    if addr == "-":
        if length != 0:
            raise FibError(f"'-' only denotes the zero-length prefix, got {text!r}")
        return Prefix(0, 0, width)
    if "." in addr:
        if width != 32:
            raise FibError(f"dotted-quad prefix {text!r} needs width 32")
        try:
            bits = int(ipaddress.IPv4Address(addr))
        except ValueError:
            raise FibError(f"bad IPv4 address in {text!r}") from None
        return Prefix(length, bits, width)
    if addr and set(addr) <= {"0", "1"} and len(addr) == length:
        return Prefix.from_path(int(addr, 2), length, width)
    raise FibError(f"bad prefix {text!r}")


def parse_address(text: str, width: int = DEFAULT_WIDTH) -> int:
    """Parse a destination: decimal integer, dotted quad or ``0b`` binary."""
    text = text.strip()
    if "." in text:
        value = int(ipaddress.IPv4Address(text))
    else:
        value = int(text, 0)
    if value < 0 or value >> width:
        raise FibError(f"address {text!r} does not fit in {width} bits")
    return value


class FibTable:
    """Immutable prefix -> label table over a dense alphabet [1, delta].

    ``label_names[i - 1]`` is the source label that dense label ``i`` was
    remapped from.
    """

    __slots__ = ("width", "routes", "label_names", "_entries")

    def __init__(self, routes: dict[Prefix, int], width: int = DEFAULT_WIDTH,
                 label_names: Iterable[int] | None = None):
        self.width = width
        self.routes = dict(routes)
        delta = max(self.routes.values(), default=0)
        self.label_names = (tuple(label_names) if label_names is not None
                            else tuple(range(1, delta + 1)))
        if len(self.label_names) < delta:
            raise FibError("label_names shorter than the label alphabet")
        for p, s in self.routes.items():
            if p.width != width:
                raise FibError(f"prefix {p} has width {p.width}, table has {width}")
            if not 1 <= s <= len(self.label_names):
                raise FibError(f"label {s} of {p} outside [1, {len(self.label_names)}]")
        self._entries = None

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[Prefix, int]],
                     width: int = DEFAULT_WIDTH) -> FibTable:
        """Build from (prefix, label) pairs whose labels are already dense."""
        routes = {}
        for p, s in entries:
            if p in routes:
                raise FibError(f"duplicate prefix {p}")
            routes[p] = s
        delta = max(routes.values(), default=0)
        return cls(routes, width, range(1, delta + 1))

    @property
    def delta(self) -> int:
        return len(self.label_names)

    @property
    def entries(self) -> list[tuple[Prefix, int]]:
        """Entries sorted by (length, bits)."""
        if self._entries is None:
            self._entries = sorted(self.routes.items())
        return self._entries

    def __len__(self):
        return len(self.routes)

    def __contains__(self, prefix: Prefix):
        return prefix in self.routes

    def __eq__(self, other):
        if not isinstance(other, FibTable):
            return NotImplemented
        return (self.width == other.width and self.routes == other.routes
                and self.label_names == other.label_names)

    def __repr__(self):
        return f"FibTable(N={len(self)}, delta={self.delta}, width={self.width})"

    def with_routes(self, routes: dict[Prefix, int]) -> FibTable:
        """Same width and alphabet, different route set."""
        return FibTable(routes, self.width, self.label_names)

    def label_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for s in self.routes.values():
            hist[s] = hist.get(s, 0) + 1
        return hist


def parse_fib(text: str | bytes, width: int | None = None) -> FibTable:
    """Parse the FIB dump format.

    ``#`` starts a comment.  Two comment directives are understood so that
    dumps round-trip: ``#@ width W`` and ``#@ labels a b c`` (source label of
    dense label 1, 2, 3, ...).  Without a labels directive, source labels
    that already form exactly {1..delta} are kept, anything else is remapped
    densely in first-occurrence order.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header_width = None
    declared: list[int] | None = None
    raw: list[tuple[str, str, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body, hash_, comment = line.partition("#")
        if hash_ and comment.startswith("@"):
            words = comment[1:].split()
            if words and words[0] == "width":
                header_width = int(words[1])
            elif words and words[0] == "labels":
                declared = [int(w) for w in words[1:]]
        fields = body.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise FibError(f"expected '<prefix>/<len> <label>', got {body.strip()!r}", lineno)
        raw.append((fields[0], fields[1], lineno))

    if width is None:
        width = header_width if header_width is not None else DEFAULT_WIDTH
    routes: dict[Prefix, int] = {}
    sources: dict[Prefix, int] = {}
    order: list[int] = []
    seen: set[int] = set()
    for ptext, ltext, lineno in raw:
        try:
            prefix = parse_prefix(ptext, width)
        except FibError as e:
            raise FibError(str(e), lineno) from None
        try:
            label = int(ltext)
        except ValueError:
            raise FibError(f"label {ltext!r} is not an integer", lineno) from None
        if label == INVALID:
            raise FibError("explicit blackhole route (label 0) rejected", lineno)
        if label < 0:
            raise FibError(f"negative label {label}", lineno)
        if prefix in sources:
            raise FibError(f"duplicate prefix {prefix}", lineno)
        sources[prefix] = label
        if label not in seen:
            seen.add(label)
            order.append(label)

    if declared is not None:
        if len(set(declared)) != len(declared) or not seen <= set(declared):
            raise FibError("labels directive does not cover the labels used")
        names = declared
    elif seen == set(range(1, len(seen) + 1)):
        names = sorted(seen)
    else:
        names = order
    dense = {src: i for i, src in enumerate(names, 1)}
    for prefix, label in sources.items():
        routes[prefix] = dense[label]
    return FibTable(routes, width, names)


def serialize_fib(fib: FibTable) -> bytes:
    """Canonical dump: header directives, then entries sorted by (length, bits)."""
    lines = [f"# FIB dump: N={len(fib)} delta={fib.delta}",
             f"#@ width {fib.width}"]
    if fib.label_names:
        lines.append("#@ labels " + " ".join(map(str, fib.label_names)))
    names = fib.label_names
    lines.extend(f"{p} {names[s - 1]}" for p, s in fib.entries)
    return ("\n".join(lines) + "\n").encode("utf-8")


def oracle_lookup(fib: FibTable, address: int) -> int | None:
    """Longest-prefix match by scanning every entry; None means no route."""
    best_len = -1
    best = None
    width = fib.width
    for p, s in fib.routes.items():
        if p.length > best_len:
            shift = width - p.length
            if (address >> shift) == (p.bits >> shift):
                best_len = p.length
                best = s
    return best


class LengthIndex:
    """Longest-prefix match by probing one hash table per prefix length,
    longest first.  Independent of ``oracle_lookup`` and fast enough to
    check large tables."""

    def __init__(self, fib: FibTable):
        self.width = fib.width
        by_len: dict[int, dict[int, int]] = {}
        for p, s in fib.routes.items():
            by_len.setdefault(p.length, {})[p.path] = s
        self._levels = sorted(by_len.items(), reverse=True)

    def lookup(self, address: int) -> int | None:
        for length, table in self._levels:
            s = table.get(address >> (self.width - length))
            if s is not None:
                return s
        return None
