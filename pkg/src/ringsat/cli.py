"""Command-line entry point: solve, check, and bench subcommands.

Output follows the SAT-competition convention: `c` comment lines, one
`s SATISFIABLE` / `s UNSATISFIABLE` / `s UNKNOWN` status line, `v` value
lines terminated by 0, and exit codes 10/20/0 (1 for usage errors)."""

import argparse
import sys
import time

from . import __version__
from .bench import discover_instances, run_bench, write_csv
from .checker import check_proof
from .proof import MODE_FAKECOPY, MODE_OFF, MODE_SHARED
from .ruler import Options, solve_file
from .formula import ParseError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ringsat", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a DIMACS CNF file")
    solve.add_argument("input", help="path to a DIMACS CNF file")
    solve.add_argument("--threads", type=int, default=None,
                       help="solver threads (default: machine parallelism)")
    solve.add_argument("--proof", dest="proof_path", default=None,
                       help="write a DRAT proof to this path")
    solve.add_argument("--binary-proof", action="store_true",
                       help="use the binary DRAT encoding")
    solve.add_argument("--proof-mode", choices=[MODE_SHARED, MODE_FAKECOPY],
                       default=MODE_SHARED)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--time-limit", type=float, default=None, metavar="SEC")
    solve.add_argument("--conflict-limit", type=int, default=None)
    solve.add_argument("--no-inprocessing", action="store_true")
    solve.add_argument("--no-preprocessing", action="store_true")
    solve.add_argument("--no-exchange", action="store_true")
    group = solve.add_mutually_exclusive_group()
    group.add_argument("--quiet", "-q", action="store_true")
    group.add_argument("-v", dest="verbose", action="count", default=0)

    check = sub.add_parser("check", help="check a DRAT proof against a CNF")
    check.add_argument("cnf")
    check.add_argument("proof")
    check.add_argument("--binary", action="store_true")

    bench = sub.add_parser("bench", help="run a corpus and emit a CSV report")
    bench.add_argument("corpus", help="directory of .cnf files")
    bench.add_argument("--threads", default="1",
                       help="comma-separated thread counts (default 1)")
    bench.add_argument("--seeds", default="0", help="comma-separated seeds")
    bench.add_argument("--modes", default=MODE_SHARED,
                       help="comma-separated proof modes (shared,fakecopy,off)")
    bench.add_argument("--time-limit", type=float, default=None, metavar="SEC")
    bench.add_argument("--no-check", action="store_true",
                       help="skip proof checking of UNSAT results")
    bench.add_argument("--output", "-o", default=None,
                       help="CSV output path (default stdout)")
    return parser


def _print_model(model):
    line = "v"
    for lit in model + [0]:
        tok = " %d" % lit
        if len(line) + len(tok) > 78:
            print(line)
            line = "v"
        line += tok
    print(line)


def _cmd_solve(args) -> int:
    if args.threads is not None and args.threads < 1:
        sys.stderr.write("error: --threads must be a positive integer\n")
        return 1
    try:
        options = Options(threads=args.threads, proof_path=args.proof_path,
                          proof_binary=args.binary_proof,
                          proof_mode=args.proof_mode, seed=args.seed,
                          time_limit=args.time_limit,
                          conflict_limit=args.conflict_limit,
                          inprocessing=not args.no_inprocessing,
                          preprocessing=not args.no_preprocessing,
                          exchange=not args.no_exchange,
                          verbosity=0 if args.quiet else 1 + args.verbose)
    except ValueError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    chatty = not args.quiet
    if chatty:
        print("c ringsat %s" % __version__)
        print("c solving %s with %d thread(s)" % (args.input, options.threads))
    start = time.monotonic()
    try:
        result = solve_file(args.input, options)
    except ParseError as exc:
        sys.stderr.write("parse error: %s\n" % exc)
        return 1
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    wall = time.monotonic() - start
    if result.verdict == "SAT":
        print("s SATISFIABLE")
        _print_model(result.model)
    elif result.verdict == "UNSAT":
        print("s UNSATISFIABLE")
    else:
        print("s UNKNOWN")
    if chatty:
        stats = result.stats
        for key in ("conflicts", "decisions", "propagations", "restarts",
                    "reductions", "imports", "exports", "learned",
                    "inprocessing_rounds", "eliminated_vars",
                    "peak_literal_bytes"):
            print("c %s %s" % (key, stats.get(key, 0)))
        print("c wall_time %.3f s" % wall)
    sys.stdout.flush()
    return result.exit_code


def _cmd_check(args) -> int:
    try:
        result = check_proof(args.cnf, args.proof, binary=args.binary)
    except (ParseError, ValueError) as exc:
        sys.stderr.write("parse error: %s\n" % exc)
        return 1
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    if result.ok:
        print("s VERIFIED")
        return 0
    print("s NOT VERIFIED")
    if result.verdict == "AddFailed":
        sys.stderr.write("failed-add %d\n" % result.failed_line)
    else:
        sys.stderr.write("no-empty-clause\n")
    return 1


def _cmd_bench(args) -> int:
    try:
        instances = discover_instances(args.corpus)
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    if not instances:
        sys.stderr.write("error: no .cnf files in %s\n" % args.corpus)
        return 1
    threads = [int(x) for x in args.threads.split(",") if x]
    seeds = [int(x) for x in args.seeds.split(",") if x]
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for mode in modes:
        if mode not in (MODE_SHARED, MODE_FAKECOPY, MODE_OFF):
            sys.stderr.write("error: unknown proof mode %r\n" % mode)
            return 1
    rows = run_bench(instances, threads, seeds, modes,
                     time_limit=args.time_limit, check=not args.no_check)
    if args.output:
        with open(args.output, "w", newline="") as out:
            write_csv(rows, out)
    else:
        write_csv(rows, sys.stdout)
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "check":
        return _cmd_check(args)
    return _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
