"""Command-line interface: gen / run / compare / analyze / interleave.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or corrupt
trace, file I/O), 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .analysis import REPORT_KINDS, analyze, compare, run_report
from .engine import BYPASS, CacheGeometry, DEFAULT_GEOMETRY
from .errors import DataError, InternalInvariantError, UsageError
from .runner import DEFAULT_SEED, POLICY_NAMES
from .trace import GENERATOR_KINDS, GeneratorSpec, gen_synthetic, interleave, load_trace, save_trace


def _add_geometry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sets", type=int, default=DEFAULT_GEOMETRY.num_sets)
    p.add_argument("--ways", type=int, default=DEFAULT_GEOMETRY.associativity)
    p.add_argument("--block-bits", type=int, default=DEFAULT_GEOMETRY.block_offset_bits)


def _geometry(args) -> CacheGeometry:
    try:
        return CacheGeometry(args.sets, args.ways, args.block_bits)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _fixed_init(args) -> int | None:
    value = getattr(args, "ehc_fixed_init", None)
    if value is not None and not 0 <= value <= 7:
        raise UsageError("--ehc-fixed-init must be in 0..7")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehcsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic trace")
    p.add_argument("--kind", required=True, choices=GENERATOR_KINDS)
    p.add_argument("--blocks", type=int, required=True, help="working-set size in blocks")
    p.add_argument("--length", type=int, required=True, help="number of accesses")
    p.add_argument("--alpha", type=float, default=1.0, help="Zipf skew")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("run", help="simulate one policy over a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--policy", required=True, choices=POLICY_NAMES)
    _add_geometry_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--events", help="also dump the replacement event log (CSV)")
    p.add_argument("--ehc-fixed-init", type=int, default=None)
    p.add_argument("--no-aging", action="store_true")
    p.add_argument("--csv", required=True)

    p = sub.add_parser("compare", help="run several policies side by side")
    p.add_argument("--trace", required=True)
    p.add_argument("--policies", required=True, help="comma-separated policy names")
    _add_geometry_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--events", action="store_true",
                   help="score victim quality too (slower, reference engine)")
    p.add_argument("--csv", required=True)

    p = sub.add_parser("analyze", help="replacement-quality instruments")
    p.add_argument("--trace", required=True)
    p.add_argument("--report", required=True, choices=REPORT_KINDS)
    p.add_argument("--policy", default="ehc", choices=POLICY_NAMES)
    _add_geometry_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--csv", required=True)

    p = sub.add_parser("interleave", help="merge per-program traces into one")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("inputs", nargs="+")

    return parser


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(args.kind, args.blocks, args.length, args.alpha, args.seed)
    save_trace(gen_synthetic(spec), args.output)
    return 0


def _write_events(path, events, assoc: int) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["index", "set", "victim_way", "no_averse", "incoming"]
            + [f"resident_{w}" for w in range(assoc)]
        )
        for ev in events:
            writer.writerow(
                [
                    ev.index,
                    ev.set_index,
                    "bypass" if ev.victim_way == BYPASS else ev.victim_way,
                    int(ev.no_averse),
                    f"0x{ev.incoming_addr:x}",
                ]
                + [f"0x{a:x}" for a in ev.resident_addrs]
            )


def _cmd_run(args) -> int:
    geom = _geometry(args)
    trace = load_trace(args.trace)
    report, _, events = run_report(
        trace,
        args.policy,
        geom,
        seed=args.seed,
        record_events=bool(args.events),
        ehc_fixed_init=_fixed_init(args),
        aging=not args.no_aging,
    )
    report.write(args.csv)
    if args.events:
        _write_events(args.events, events, geom.associativity)
    return 0


def _cmd_compare(args) -> int:
    geom = _geometry(args)
    trace = load_trace(args.trace)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise UsageError("--policies must name at least one policy")
    compare(trace, policies, geom, seed=args.seed, events=args.events).write(args.csv)
    return 0


def _cmd_analyze(args) -> int:
    geom = _geometry(args)
    trace = load_trace(args.trace)
    analyze(trace, args.report, policy=args.policy, geom=geom, seed=args.seed).write(args.csv)
    return 0


def _cmd_interleave(args) -> int:
    traces = [load_trace(path) for path in args.inputs]
    save_trace(interleave(traces), args.output)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "analyze": _cmd_analyze,
    "interleave": _cmd_interleave,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"ehcsim: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"ehcsim: {e}", file=sys.stderr)
        return 2
    except InternalInvariantError as e:
        print(f"ehcsim: internal invariant violated: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
