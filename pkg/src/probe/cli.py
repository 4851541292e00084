"""Command-line front end: ``probe <subcommand> ...``.

Exit status is 0 on success, 1 for user or input errors (bad syntax,
ill-formed specifications, semantic errors) and 2 when an internal limit
such as the product-size bound is exceeded.  Results go to standard
output unless ``--out`` is given; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from probe.errors import LimitExceeded, ProbeError

EXIT_OK = 0
EXIT_USER = 1
EXIT_LIMIT = 2


class _UserError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _UserError(f"{path}: {exc.strerror or exc}") from None


def _load_spec(path: str, quiet_warnings: bool = False):
    """Parse and validate; warnings go to stderr, errors abort."""
    from probe.lang.parser import parse_spec
    from probe.lang.validate import validate
    try:
        spec = parse_spec(_read_text(path))
    except ProbeError as exc:
        raise _UserError(f"{path}:{exc}") from None
    diags = validate(spec)
    bad = False
    for d in diags:
        if d.severity == "error" or not quiet_warnings:
            print(f"{path}:{d}", file=sys.stderr)
        bad = bad or d.severity == "error"
    if bad:
        raise _UserError(f"{path}: specification has errors")
    return spec


def _limits(args):
    from probe.semantics import ExploreLimits
    try:
        return ExploreLimits(max_nd_states=args.max_states, max_depth=args.max_depth,
                             max_support=args.max_support, max_product=args.max_product)
    except ValueError as exc:
        raise _UserError(str(exc)) from None


def _load_plts(path: str, args):
    """A ``.pdes`` file is read as is; anything else is parsed and explored."""
    from probe.semantics import explore, read_plts
    if path.endswith(".pdes"):
        return read_plts(_read_text(path))
    return explore(_load_spec(path, quiet_warnings=True), _limits(args))


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    from probe.lang.printer import pretty_print
    spec = _load_spec(args.file)
    if args.print:
        _emit(pretty_print(spec), args.out)
    return EXIT_OK


def cmd_explore(args) -> int:
    from probe.semantics import explore, write_plts
    plts = explore(_load_spec(args.file, quiet_warnings=True), _limits(args))
    note = " (truncated)" if plts.truncated else ""
    if args.out:
        _emit(write_plts(plts), args.out)
        print(plts.summary() + note)
    else:
        sys.stdout.write(write_plts(plts))
        print(plts.summary() + note, file=sys.stderr)
    return EXIT_OK


def cmd_minimize(args) -> int:
    from probe.bisimulation import minimize
    from probe.semantics import write_plts
    plts = _load_plts(args.file, args)
    quotient, _ = minimize(plts)
    summary = f"{plts.summary()} -> {quotient.summary()}"
    if args.out:
        _emit(write_plts(quotient), args.out)
        print(summary)
    else:
        sys.stdout.write(write_plts(quotient))
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    from probe.bisimulation import equivalent
    verdict = equivalent(_load_plts(args.first, args), _load_plts(args.second, args))
    _emit(f"{verdict}\n", args.out)
    return EXIT_OK


def cmd_trace(args) -> int:
    from probe.semantics import _format_prob, bounded_trace_distribution
    if args.length < 0:
        raise _UserError("--length must be non-negative")
    dist = bounded_trace_distribution(_load_plts(args.file, args), args.length)
    lines = [f"{_format_prob(p)}\t{' '.join(trace) if trace else '(empty)'}" for trace, p in dist.items()]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from probe.montecarlo import parse_scheduler, simulate
    spec = _load_spec(args.file, quiet_warnings=True)
    if args.runs <= 0 or args.steps < 0 or args.jobs <= 0:
        raise _UserError("--runs and --jobs must be positive, --steps non-negative")
    sched = parse_scheduler(args.scheduler or ["uniform"])
    report = simulate(spec, sched, runs=args.runs, max_steps=args.steps, seed=args.seed,
                      jobs=args.jobs, keep_traces=args.traces)
    text = report.to_json() + "\n" if args.json else report.to_text()
    if args.traces:
        text += report.trace_lines()
    _emit(text, args.out)
    return EXIT_OK


def cmd_hotel(args) -> int:
    from probe.hotel import format_hotel_table, hotel_table, limit_estimate
    if any(n < 1 for n in args.n):
        raise _UserError("group counts must be positive")
    text = format_hotel_table(hotel_table(args.n), csv=args.csv)
    if args.extrapolate:
        est = limit_estimate(args.n)
        text += f"# extrapolated limit {est.limit:.10f} (fit residual {est.residual:.3e})\n"
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None


def _add_limits(p):
    from probe.semantics import DEFAULT_MAX_PRODUCT, DEFAULT_MAX_SUPPORT
    p.add_argument("--max-states", type=int, default=100_000, help="nd-states explored before truncating")
    p.add_argument("--max-depth", type=int, default=1_000_000, help="actions from the start before truncating")
    p.add_argument("--max-support", type=int, default=DEFAULT_MAX_SUPPORT,
                   help="values enumerated for a countable distribution")
    p.add_argument("--max-product", type=int, default=DEFAULT_MAX_PRODUCT,
                   help="largest joint distribution built for + and sum")


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors are user errors (exit 1); 2 is reserved for limits."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    from probe.montecarlo import DEFAULT_SEED
    ap = _ArgumentParser(prog="probe", description="Probabilistic process toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("parse", help="parse and validate a specification")
    p.add_argument("file")
    p.add_argument("--print", action="store_true", help="pretty-print the parsed specification")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("explore", help="build the transition system (pdes format)")
    p.add_argument("file")
    p.add_argument("--out")
    _add_limits(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("minimize", help="quotient by probabilistic bisimulation")
    p.add_argument("file", help=".prb specification or .pdes transition system")
    p.add_argument("--out")
    _add_limits(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("compare", help="decide bisimilarity of two systems")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--out")
    _add_limits(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="distribution over bounded traces")
    p.add_argument("file")
    p.add_argument("--length", "-L", type=int, default=5)
    p.add_argument("--out")
    _add_limits(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("simulate", help="Monte Carlo estimates of action probabilities")
    p.add_argument("file")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                   help=f"random seed (default 0x{DEFAULT_SEED:X})")
    p.add_argument("--scheduler", action="append",
                   help="uniform, fixed:<k> or resolve:<var>=<density>; repeatable")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--traces", action="store_true", help="also print every run's action sequence")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hotel", help="light-on probability for n guest groups")
    p.add_argument("n", type=int, nargs="+")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--extrapolate", action="store_true",
                   help="fit L + c/n to the last three points")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hotel)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LimitExceeded as exc:
        print(f"probe: limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except RecursionError:
        print("probe: limit exceeded: recursion too deep", file=sys.stderr)
        return EXIT_LIMIT
    except (_UserError, ProbeError, ValueError) as exc:
        print(f"probe: {exc}", file=sys.stderr)
        return EXIT_USER
    except OSError as exc:
        print(f"probe: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
