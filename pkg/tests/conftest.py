import random
import sys

import pytest
from hypothesis import settings, strategies as st

from fibcomp.fib import FibTable, Prefix, parse_fib

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Fig. 1(a): four-bit table used throughout the examples
SMALL_TEXT = """\
-/0 2
0/1 3
00/2 3
001/3 2
01/2 2
011/3 1
"""

# folding example: seven entries over four-bit addresses
SHARED_TEXT = """\
-/0 1
1/1 2
01/2 3
001/3 2
100/3 1
1100/4 1
111/3 3
"""


@pytest.fixture
def small():
    return parse_fib(SMALL_TEXT, 4)


@pytest.fixture
def shared():
    return parse_fib(SHARED_TEXT, 4)


def random_prefix(rng: random.Random, width: int, max_len: int | None = None) -> Prefix:
    length = rng.randint(0, width if max_len is None else max_len)
    return Prefix.from_path(rng.getrandbits(length) if length else 0, length, width)


def random_fib(rng: random.Random, width: int, count: int, delta: int = 4) -> FibTable:
    routes = {}
    for _ in range(count):
        routes[random_prefix(rng, width)] = rng.randint(1, delta)
    return FibTable(routes, width, range(1, delta + 1))


@st.composite
def fib_tables(draw, width=8, max_entries=40, delta=4):
    entries = draw(st.lists(
        st.tuples(st.integers(0, width), st.integers(0, 2 ** width - 1), st.integers(1, delta)),
        max_size=max_entries))
    routes = {}
    for length, path, label in entries:
        routes[Prefix.from_path(path >> (width - length), length, width)] = label
    return FibTable(routes, width, range(1, delta + 1))


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
