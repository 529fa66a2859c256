"""Command-line front end: ``fibcomp <command> ...``; run with ``-h`` for help.

Exit codes: 0 success, 2 usage error, 3 malformed input (FIB dump, update
file, trace), 4 I/O error, 5 corrupt or unsupported blob, 6 a structure
failed validation against the oracle, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from fibcomp.entropy import static_table
from fibcomp.fib import FibError, FibTable, parse_address, parse_fib, serialize_fib
from fibcomp.pdag import DagError, PdagBlob, dag_build, serialize_pdag
from fibcomp.succinct import LabelSequence, SuccinctError
from fibcomp.workbench import (BenchError, GeneratorSpec, apply_update, bench_lookup, bench_updates,
                               format_updates, gen_updates, parse_updates, random_addresses, read_trace,
                               static_row, sweep_lambda, validate)
from fibcomp.xbwb import XbwError, XbwTransform, xbw_rebuild

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INPUT, EXIT_IO, EXIT_FORMAT, EXIT_VALIDATION = 0, 1, 2, 3, 4, 5, 6
SEED_ENV = "FIBCOMP_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw, 0)
    except ValueError:
        raise SystemExit(f"{SEED_ENV}={raw!r} is not an integer")


def read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def write_bytes(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def load_structure(data: bytes, width: int | None):
    """A blob (by magic) or a FIB dump."""
    if data[:4] == b"PDAG":
        return PdagBlob.from_bytes(data)
    if data[:4] == b"XBWB":
        return XbwTransform.from_bytes(data)
    return parse_fib(data, width)


def parse_barrier(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"barrier must be an integer or 'auto', got {text!r}")


def parse_range(text: str) -> list[int]:
    """``a:b`` or ``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        step = parts[2] if len(parts) == 3 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return [int(x) for x in text.split(",")]


# -- commands ------------------------------------------------------------------

def cmd_generate(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    spec = GeneratorSpec(kind=args.kind, seed=seed, count=args.count, width=args.width,
                         delta=args.delta, poisson=args.poisson, p=args.p)
    base = parse_fib(read_bytes(args.base), args.width) if args.base else None
    fib = spec.generate(base)
    write_bytes(args.output, serialize_fib(fib))
    return EXIT_OK


def cmd_build(args) -> int:
    fib = parse_fib(read_bytes(args.fib), args.width)
    if args.format == "trie":
        out = serialize_fib(fib)
    elif args.format == "xbwb":
        out = xbw_rebuild(fib, args.labels).to_bytes()
    else:
        out = serialize_pdag(dag_build(fib, args.barrier), include_fib=not args.no_fib)
    write_bytes(args.output, out)
    return EXIT_OK


def _addresses(args, width: int) -> list[int]:
    if args.trace:
        return read_trace(args.trace, width)
    return [parse_address(a, width) for a in args.address]


def cmd_lookup(args) -> int:
    structure = load_structure(read_bytes(args.blob), args.width)
    if isinstance(structure, FibTable):
        fn, width, names = dag_build(structure, 0).lookup, structure.width, structure.label_names
    elif isinstance(structure, PdagBlob):
        fn, width = structure.lookup_fn(), structure.width
        names = parse_fib(structure.fib_dump).label_names if structure.fib_dump else ()
    else:
        fn, width, names = structure.lookup, structure.width, ()
    addresses = _addresses(args, width)
    if args.verify:
        reference = parse_fib(read_bytes(args.verify), width)
        probe = structure if not isinstance(structure, FibTable) else dag_build(structure, 0)
        validate(probe, reference, addresses + random_addresses(width, 1000, default_seed()))
    for a in addresses:
        label = fn(a)
        if label is None:
            shown = "-"
        else:
            shown = names[label - 1] if label <= len(names) else label
        print(f"{a} {shown}")
    return EXIT_OK


def cmd_stats(args) -> int:
    fib = parse_fib(read_bytes(args.fib), args.width)
    name = args.name or os.path.basename(args.fib)
    row = static_row(name, fib, args.barrier)
    if args.json:
        print(json.dumps(row, indent=2, sort_keys=True))
    else:
        sys.stdout.write(static_table([row]))
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    fib = parse_fib(read_bytes(args.fib), args.width)
    addresses = read_trace(args.trace, fib.width) if args.trace else None
    reports = []
    for fmt in (["pdag", "xbwb"] if args.format == "both" else [args.format]):
        if fmt == "pdag":
            structure = PdagBlob.from_bytes(serialize_pdag(dag_build(fib, args.barrier)))
        else:
            structure = xbw_rebuild(fib)
        rep = bench_lookup(structure, fib, addresses, lookups=args.lookups, seed=seed)
        if fmt == "pdag":
            dag = dag_build(fib, args.barrier)
            memory = bench_lookup(dag, fib, addresses, lookups=min(args.lookups, 10000), seed=seed)
            rep.kind = "pdag"
            rep.barrier, rep.analytic_bits = memory.barrier, memory.analytic_bits
            rep.resident_bytes, rep.nu, rep.eta = memory.resident_bytes, memory.nu, memory.eta
            rep.visits_mean, rep.visits_max = memory.visits_mean, memory.visits_max
            if args.updates:
                ups = parse_updates(read_bytes(args.updates).decode("utf-8"), fib.width, fib.label_names)
                u = bench_updates(dag, ups)
                rep.updates, rep.update_seconds, rep.updates_per_sec = u.updates, u.update_seconds, u.updates_per_sec
                rep.update_visits_mean, rep.update_visits_max = u.update_visits_mean, u.update_visits_max
                rep.notes += u.notes
        reports.append(rep)
    _emit(args, [r.to_dict() for r in reports], reports[0].CSV_FIELDS)
    return EXIT_OK


def cmd_replay(args) -> int:
    data = read_bytes(args.base)
    if data[:4] == b"PDAG":
        blob = PdagBlob.from_bytes(data)
        dag = blob.to_dag()
        if args.barrier is not None and args.barrier != dag.barrier:
            dag = dag_build(dag.fib, args.barrier)
    else:
        dag = dag_build(parse_fib(data, args.width), 11 if args.barrier is None else args.barrier)
    ups = parse_updates(read_bytes(args.updates).decode("utf-8"), dag.width, dag.label_names)
    check = random_addresses(dag.width, args.check, default_seed()) if args.check else []
    visits = []
    for i, u in enumerate(ups, 1):
        # upsert / withdraw semantics against the current table
        if u.op == "change" and u.prefix not in dag.routes:
            u = type(u)("insert", u.prefix, u.label)
        elif u.op == "insert" and u.prefix in dag.routes:
            u = type(u)("change", u.prefix, u.label)
        elif u.op == "delete" and u.prefix not in dag.routes:
            continue
        visits.append(apply_update(dag, u))
        if check and (i % args.check_every == 0 or i == len(ups)):
            validate(dag, dag.fib, check)
    summary = {"updates": len(visits), "node_count": dag.node_count, "barrier": dag.barrier,
               "update_visits_max": max(visits, default=0),
               "update_visits_mean": sum(visits) / len(visits) if visits else 0.0}
    print(json.dumps(summary, sort_keys=True))
    if args.output:
        write_bytes(args.output, serialize_pdag(dag))
    return EXIT_OK


def cmd_updates(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    fib = parse_fib(read_bytes(args.fib), args.width)
    ups = gen_updates(args.kind, args.count, fib, seed)
    write_bytes(args.output, format_updates(ups, fib.label_names).encode("utf-8"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    fib = parse_fib(read_bytes(args.fib), args.width)
    barriers = parse_range(args.barriers) if args.barriers else list(range(fib.width + 1))
    if args.updates:
        ups = parse_updates(read_bytes(args.updates).decode("utf-8"), fib.width, fib.label_names)
    elif args.count:
        ups = gen_updates(args.update_kind, args.count, fib, seed)
    else:
        ups = []
    rows = [r.to_dict() for r in sweep_lambda(fib, barriers, ups)]
    _emit(args, rows, list(rows[0]) if rows else [])
    return EXIT_OK


def _emit(args, rows: list[dict], fields) -> None:
    if getattr(args, "csv", False):
        w = csv.DictWriter(sys.stdout, fieldnames=list(fields), extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    elif getattr(args, "json", False):
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for row in rows:
            print("  ".join(f"{k}={row[k]}" for k in fields if row.get(k) is not None))


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fibcomp", description=__doc__.split("\n\n")[0])
    ap.add_argument("--width", type=int, default=None,
                    help="address width when a dump has no width directive (default 32)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic FIB dump")
    g.add_argument("--kind", choices=["prefix-split", "bernoulli-fib", "bernoulli-string"], default="prefix-split")
    g.add_argument("--count", type=int, default=1000, help="prefixes (prefix-split)")
    g.add_argument("--delta", type=int, default=4)
    g.add_argument("--poisson", type=float, default=0.6, help="Poisson parameter for labels")
    g.add_argument("-p", type=float, default=0.5, help="Bernoulli parameter")
    g.add_argument("--base", help="base dump for bernoulli-fib")
    g.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("build", help="compress a FIB dump into a blob")
    b.add_argument("fib")
    b.add_argument("--format", choices=["trie", "xbwb", "pdag"], default="pdag")
    b.add_argument("--lambda", dest="barrier", type=parse_barrier, default=11)
    b.add_argument("--labels", choices=[LabelSequence.ENTROPY, LabelSequence.PACKED], default=LabelSequence.ENTROPY,
                   help="label encoding for xbwb")
    b.add_argument("--no-fib", action="store_true", help="omit the control FIB trailer from pdag blobs")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    lk = sub.add_parser("lookup", help="longest-prefix match on a blob or dump")
    lk.add_argument("blob")
    lk.add_argument("address", nargs="*")
    lk.add_argument("--trace", help="file with one address per line")
    lk.add_argument("--verify", metavar="DUMP",
                    help="first check the structure against this FIB dump (exit 6 on a mismatch)")
    lk.set_defaults(func=cmd_lookup)

    st = sub.add_parser("stats", help="storage report for a FIB dump")
    st.add_argument("fib")
    st.add_argument("--name")
    st.add_argument("--lambda", dest="barrier", type=parse_barrier, default=11)
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stats)

    be = sub.add_parser("bench", help="lookup and update benchmarks")
    be.add_argument("fib")
    be.add_argument("--format", choices=["pdag", "xbwb", "both"], default="both")
    be.add_argument("--lambda", dest="barrier", type=parse_barrier, default=11)
    be.add_argument("--lookups", type=int, default=10 ** 7)
    be.add_argument("--trace")
    be.add_argument("--updates", help="update file to time against the pDAG")
    be.add_argument("--seed", type=int, default=None)
    out = be.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--csv", action="store_true")
    be.set_defaults(func=cmd_bench)

    up = sub.add_parser("updates", help="write a synthetic update sequence for a FIB dump")
    up.add_argument("fib")
    up.add_argument("--kind", choices=["random", "bgp-like"], default="random")
    up.add_argument("--count", type=int, default=7500)
    up.add_argument("--seed", type=int, default=None)
    up.add_argument("-o", "--output")
    up.set_defaults(func=cmd_updates)

    rp = sub.add_parser("replay", help="apply an update file to a pDAG blob or FIB dump")
    rp.add_argument("base")
    rp.add_argument("updates")
    rp.add_argument("--lambda", dest="barrier", type=int, default=None)
    rp.add_argument("--check", type=int, default=0, metavar="K",
                    help="validate K random addresses against the oracle while replaying")
    rp.add_argument("--check-every", type=int, default=100)
    rp.add_argument("-o", "--output", help="write the updated pDAG blob here")
    rp.set_defaults(func=cmd_replay)

    sw = sub.add_parser("sweep", help="size and update cost across barrier levels")
    sw.add_argument("fib")
    sw.add_argument("--lambdas", dest="barriers", help="a:b[:step] or a comma list (default 0..W)")
    sw.add_argument("--updates", help="update file")
    sw.add_argument("--update-kind", choices=["random", "bgp-like"], default="random")
    sw.add_argument("--count", type=int, default=0, help="generate this many updates")
    sw.add_argument("--seed", type=int, default=None)
    fmt = sw.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.width is None:
        args.width = 32
    try:
        return args.func(args)
    except (FibError, UnicodeDecodeError) as e:
        print(f"fibcomp: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"fibcomp: {e}", file=sys.stderr)
        return EXIT_IO
    except (DagError, XbwError, SuccinctError) as e:
        print(f"fibcomp: bad structure: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except BenchError as e:
        print(f"fibcomp: validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (KeyError, ValueError) as e:
        print(f"fibcomp: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
