"""Compressed IP forwarding tables: a succinct level-order encoding and
folded prefix DAGs, with longest-prefix-match lookup on both."""

from fibcomp.fib import INVALID, FibError, FibTable, Prefix, oracle_lookup, parse_fib, serialize_fib
from fibcomp.trie import Trie, TrieNode, build_trie, leaf_push, trie_lookup
from fibcomp.xbwb import XbwTransform, xbw_build, xbw_lookup, xbw_rebuild
from fibcomp.pdag import PrefixDag, dag_build, dag_delete, dag_insert, dag_lookup, dag_update

__version__ = "0.1.0"

__all__ = [
    "INVALID", "FibError", "FibTable", "Prefix", "oracle_lookup", "parse_fib", "serialize_fib",
    "Trie", "TrieNode", "build_trie", "leaf_push", "trie_lookup",
    "XbwTransform", "xbw_build", "xbw_lookup", "xbw_rebuild",
    "PrefixDag", "dag_build", "dag_delete", "dag_insert", "dag_lookup", "dag_update",
]
