"""Command-line driver: compute, resume, inspect, plot, selfcheck."""
from __future__ import annotations

import argparse
import logging
import math
import os
import signal
import sys
from pathlib import Path

from . import __version__
from .edges import EdgeFile, compute_edges, external_sort_edges, read_distance_matrix, read_points
from .pipeline import Engine, fmt_float, summarize
from .store import CheckpointError, IntervalFileError, checkpoint_read, read_intervals
from .types import ContractError, InputError

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_IO = 4
EXIT_CONTRACT = 5
EXIT_CHECKPOINT = 6
EXIT_SELFCHECK = 7
EXIT_INTERRUPTED = 130

EXIT_CODES = f"""exit codes:
  {EXIT_OK}    success
  2    bad command-line usage
  {EXIT_INPUT}    input error (empty/malformed points, NaN, bad flag values)
  {EXIT_IO}    I/O error or corrupt edge/interval file
  {EXIT_CONTRACT}    internal contract violation (stream order, duplicate edge)
  {EXIT_CHECKPOINT}    checkpoint refused (version, fingerprint, truncation, corruption)
  {EXIT_SELFCHECK}    selfcheck found a mismatch
  {EXIT_INTERRUPTED}  interrupted (a final checkpoint is written when --checkpoint is set)
"""

log = logging.getLogger("streamph")


class _Interrupt:
    def __init__(self):
        self.hit = False

    def __call__(self, signum, frame):
        self.hit = True


def _print_summary(eng: Engine, intervals_path, total: int) -> None:
    st, stats = eng.state, eng.stats
    summ = summarize(intervals_path)
    cas = st.cascade_stats()
    betti = st.betti_numbers()
    print(f"processed {stats.edges} edges ({eng.bundle.edges_processed} in total), "
          f"epsilon reached {fmt_float(eng.bundle.epsilon)}")
    print(f"{len(st)} simplices consumed, {total} intervals written to {intervals_path}")
    for d, c in summ["counts"].items():
        print(f"  H{d}: {c} intervals, {summ['open'][d]} infinite")
    print(f"betti numbers at stop: {betti}")
    print(f"peak registry size {stats.peak_registry}, largest edge batch {stats.max_batch}")
    print(f"cascades: {cas['paired']} paired, mean size {cas['mean']:.3f}, max {cas['max']}")
    print(f"#: edges={eng.bundle.edges_processed}")
    print(f"#: edges_this_run={stats.edges}")
    print(f"#: epsilon={fmt_float(eng.bundle.epsilon)}")
    print(f"#: simplices={len(st)}")
    print(f"#: intervals={total}")
    for d, c in summ["counts"].items():
        print(f"#: intervals_dim{d}={c} open_dim{d}={summ['open'][d]}")
    print(f"#: betti={','.join(map(str, betti))}")
    for d, bars in summ["longest"].items():
        for iv in bars:
            print(f"#: bar dim={d} birth={fmt_float(iv.birth)} death={fmt_float(iv.death)}")
    print(f"#: peak_registry={stats.peak_registry}")
    print(f"#: max_batch={stats.max_batch} peak_live={stats.peak_live}")
    print(f"#: cascade_paired={cas['paired']} cascade_mean={cas['mean']!r} cascade_max={cas['max']}")
    print(f"#: checkpoints={stats.checkpoints} interrupted={int(stats.interrupted)}")


def _drive(eng: Engine, args, checkpoint) -> int:
    stop = _Interrupt()
    old = signal.signal(signal.SIGINT, stop)
    try:
        eng.run(stop_epsilon=args.stop_epsilon, checkpoint=checkpoint,
                checkpoint_every=args.checkpoint_every, should_stop=lambda: stop.hit)
    finally:
        signal.signal(signal.SIGINT, old)
    if eng.stats.interrupted:
        eng.close()
        print(f"interrupted after {eng.stats.edges} edges"
              + (f"; checkpoint written to {checkpoint}" if checkpoint else ""), file=sys.stderr)
        return EXIT_INTERRUPTED
    total = eng.finalize()
    _print_summary(eng, args.intervals, total)
    return EXIT_OK


def cmd_compute(args) -> int:
    if args.max_dim < 1 or args.max_dim > 250:
        raise InputError("--max-dim must be between 1 and 250")
    if args.stop_epsilon is not None and args.stop_epsilon > args.max_epsilon:
        raise InputError("--stop-epsilon must not exceed --max-epsilon")
    if args.stop_epsilon is None:
        args.stop_epsilon = math.inf
    if args.metric == "matrix":
        data = read_distance_matrix(args.input)
    else:
        data = read_points(args.input, header=args.header)
    n = data.shape[0]
    stem = Path(args.input)
    edges_path = Path(args.edges or stem.with_suffix(".edges"))
    args.intervals = args.intervals or str(stem.with_suffix(".intervals"))

    raw_path = edges_path.with_name(edges_path.name + ".unsorted")
    raw = compute_edges(data, args.metric, args.max_epsilon, raw_path)
    try:
        edge_file = external_sort_edges(raw, edges_path, args.memory_budget)
    finally:
        os.unlink(raw_path)
    log.info("wrote %d sorted edges to %s", edge_file.record_count, edges_path)
    eng = Engine.fresh(edge_file, n, args.max_dim, args.intervals, representatives=args.representatives)
    return _drive(eng, args, args.checkpoint)


def cmd_resume(args) -> int:
    edge_file = EdgeFile.open(args.edges)
    eng = Engine.resume(args.checkpoint, edge_file, args.intervals)
    if args.stop_epsilon is None:
        args.stop_epsilon = math.inf
    return _drive(eng, args, args.checkpoint)


def cmd_inspect(args) -> int:
    b = checkpoint_read(args.checkpoint)
    st, reg = b.state, b.registry
    betti = st.betti_numbers()
    print(f"cursor offset {b.offset} ({b.edges_processed} edges processed)")
    print(f"epsilon reached {fmt_float(b.epsilon)}")
    print(f"vertices {reg.n}, max_dim {reg.max_dim}")
    print(f"registry: {len(reg)} maximal cliques")
    for size, count in reg.size_histogram().items():
        print(f"  size {size}: {count}")
    print(f"simplices consumed {len(st)}, closed intervals {st.closed_count}")
    print(f"open intervals per dimension: {betti}")
    print(f"#: offset={b.offset}")
    print(f"#: edges={b.edges_processed}")
    print(f"#: epsilon={fmt_float(b.epsilon)}")
    print(f"#: registry={len(reg)}")
    print("#: clique_sizes=" + ",".join(f"{k}:{v}" for k, v in reg.size_histogram().items()))
    print(f"#: betti={','.join(map(str, betti))}")
    print(f"#: closed_count={st.closed_count}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plot import render_svg, render_txt

    ivs = [iv for iv in read_intervals(args.intervals)
           if iv.is_open or iv.death - iv.birth >= args.min_length]
    text = render_svg(ivs) if args.format == "svg" else render_txt(ivs, args.width)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_suites

    print(f"selfcheck seed={args.seed} trials={args.trials}")
    if args.trials == 0:
        print("warning: trials=0, nothing was checked", file=sys.stderr)
    failures = run_suites(args.seed, args.trials, listing_threshold=args.listing_threshold)
    if failures:
        print("first counterexample:", file=sys.stderr)
        print(str(failures[0]), file=sys.stderr)
        return EXIT_SELFCHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="streamph",
        description="Streaming Vietoris-Rips persistent homology with checkpoint/resume.",
        epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="build the edge file and run the interleaved computation",
                       epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    c.add_argument("--input", required=True, help="points (CSV/whitespace) or lower-triangular matrix")
    c.add_argument("--header", action="store_true", help="skip the first non-empty input row")
    c.add_argument("--metric", choices=("euclidean", "manhattan", "matrix"), default="euclidean")
    c.add_argument("--max-epsilon", type=float, default=math.inf)
    c.add_argument("--max-dim", type=int, default=3)
    c.add_argument("--edges", help="sorted edge file to write [default: <input>.edges]")
    c.add_argument("--intervals", help="interval file to write [default: <input>.intervals]")
    c.add_argument("--checkpoint")
    c.add_argument("--checkpoint-every", type=int, default=0, metavar="EDGES")
    c.add_argument("--stop-epsilon", type=float)
    c.add_argument("--memory-budget", type=int, default=64 << 20, metavar="BYTES")
    c.add_argument("--representatives", action="store_true",
                   help="also write representative cycles of closed intervals to <intervals>.reps")
    c.set_defaults(func=cmd_compute)

    r = sub.add_parser("resume", help="continue from a checkpoint",
                       epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--edges", required=True)
    r.add_argument("--intervals", required=True)
    r.add_argument("--stop-epsilon", type=float)
    r.add_argument("--checkpoint-every", type=int, default=0, metavar="EDGES")
    r.set_defaults(func=cmd_resume)

    i = sub.add_parser("inspect", help="describe a checkpoint")
    i.add_argument("--checkpoint", required=True)
    i.set_defaults(func=cmd_inspect)

    pl = sub.add_parser("plot", help="render an interval file as a barcode")
    pl.add_argument("--intervals", required=True)
    pl.add_argument("--format", choices=("txt", "svg"), default="txt")
    pl.add_argument("--min-length", type=float, default=0.0)
    pl.add_argument("--out")
    pl.add_argument("--width", type=int, help="text width [default: terminal width]")
    pl.set_defaults(func=cmd_plot)

    s = sub.add_parser("selfcheck", help="run the oracle-equivalence suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--listing-threshold", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CheckpointError as exc:
        print(f"checkpoint error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (OSError, IntervalFileError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
