"""Command line front end.

Subcommands: factor, search, solve, replay-table1, stats.  Exit codes:
0 success, 1 replay tolerance failure, 2 runtime failure (vanished mass,
resource caps, I/O), 3 usage error, 4 no factor / no solution / infeasible
system.  Set HOAMP_THREADS to cap the worker pool used for large ensembles.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .constraints import ConstraintSystem
from .dynamics import OscillatorParams
from .errors import (ConditionedMassVanished, CutoffTooSmall, DimensionTooLarge,
                     DomainError, DomainTooLarge, EmptyRange, HoampError,
                     InfeasibleSystem, NoFactorInRange, NoSolutionFound, ParseError)
from .factoring import (TABLE1_TIME_GRID_NOTE, FactoringConfig, replay_table1,
                        run_factoring, table1_comparison)
from .reporting import (fmt_float, report_to_dict, summarize_trajectories,
                        to_json_text, write_iteration_csv, write_json,
                        write_replay_csv, write_stats_long_csv,
                        write_stats_summary_csv)
from .rng import SplitMix64
from .search import BlackBox, SearchConfig, run_search
from .solver import MarkerBank, run_solver

_STREAM_STATS = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_floats(text: str, flag: str):
    try:
        return tuple(float(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated numbers, got {text!r}")


def _parse_ints(text: str, flag: str):
    try:
        return tuple(int(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated integers, got {text!r}")


def _load_solution_indices(path: str):
    import json
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        if not isinstance(data, list):
            raise _UsageError(f"{path}: expected a JSON array of indices")
        return tuple(int(i) for i in data)
    except json.JSONDecodeError:
        return _parse_ints(text, path)


def _oscillator_params(args) -> OscillatorParams:
    couplings = _parse_floats(args.couplings, "--couplings") if args.couplings else (1.0,)
    try:
        return OscillatorParams(omega=(), couplings=couplings, order=args.k_order)
    except ValueError as exc:
        raise _UsageError(str(exc))


def _alpha_schedule(args) -> tuple:
    if getattr(args, "alpha_schedule", None):
        return _parse_floats(args.alpha_schedule, "--alpha-schedule")
    return (args.alpha,)


def _times(args):
    if getattr(args, "times", None):
        return _parse_floats(args.times, "--times")
    return "seeded"


def _emit(args, report_dict, csv_writer) -> None:
    """Write the report to --out-dir, or print it to stdout."""
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        base = os.path.join(args.out_dir, args.basename)
        if args.format == "json":
            write_json(base + ".json", report_dict)
            print(f"wrote {base}.json")
        else:
            csv_writer(base + ".csv")
            print(f"wrote {base}.csv")
    else:
        if args.format == "json":
            sys.stdout.write(to_json_text(report_dict))
        else:
            import tempfile
            with tempfile.NamedTemporaryFile("r", suffix=".csv", delete=False) as fh:
                tmp = fh.name
            try:
                csv_writer(tmp)
                with open(tmp) as fh:
                    sys.stdout.write(fh.read())
            finally:
                os.unlink(tmp)



def _say(args, msg: str) -> None:
    """Human summary: stdout normally, stderr when the report uses stdout."""
    print(msg, file=sys.stdout if args.out_dir else sys.stderr)

def cmd_factor(args) -> int:
    config = FactoringConfig(
        N=args.n, params=_oscillator_params(args), alpha_schedule=_alpha_schedule(args),
        times=_times(args), seed=args.seed, L_max=args.l_max,
        stop_fidelity=args.stop_fidelity,
    )
    report = run_factoring(config, progress=args.progress)
    args.basename = "factor_report"
    meta = {"command": "factor", "N": args.n, "seed": args.seed}
    _emit(args, report_to_dict(report),
          lambda p: write_iteration_csv(p, report, meta))
    if report.sampled_factors is None:
        print(f"sampled {report.sampled_tuple}, not a factor pair of {args.n}",
              file=sys.stderr)
        return 4
    p, q = report.sampled_factors
    _say(args, f"{args.n} = {p} * {q}   (fidelity {fmt_float(report.final_fidelity)}, "
               f"{len(report.records)} iterations)")
    return 0


def cmd_search(args) -> int:
    if args.solutions is not None:
        indices = _parse_ints(args.solutions, "--solutions")
    elif args.solutions_file is not None:
        indices = _load_solution_indices(args.solutions_file)
    else:
        raise _UsageError("search needs --solutions or --solutions-file")
    try:
        box = BlackBox.from_solution_indices(args.n, indices)
        config = SearchConfig(alpha_schedule=_alpha_schedule(args), L_max=args.l_max,
                              stop_mass=args.stop_mass, seed=args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc))
    report = run_search(config, box)
    args.basename = "search_report"
    meta = {"command": "search", "domain": args.n, "seed": args.seed}
    _emit(args, report_to_dict(report),
          lambda p: write_iteration_csv(p, report, meta))
    found = ", ".join(str(n) for n, _ in report.solutions)
    _say(args, f"marked items: {found}   ({len(report.records)} iterations, "
               f"{report.oracle_calls} oracle calls)")
    return 0


def cmd_solve(args) -> int:
    try:
        with open(args.system) as fh:
            system = ConstraintSystem.from_json(fh.read())
    except OSError as exc:
        print(f"cannot read {args.system}: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, TypeError) as exc:
        raise _UsageError(f"bad system file {args.system}: {exc}")
    if args.alpha_schedule:
        bank = MarkerBank(
            omegas=(0.0,) * len(system.constraints),
            alpha_schedules=(_parse_floats(args.alpha_schedule, "--alpha-schedule"),)
            * len(system.constraints))
    else:
        bank = MarkerBank.uniform(len(system.constraints), alpha=args.alpha)
    report = run_solver(system, bank=bank, mode=args.mode, times=_times(args),
                        seed=args.seed, L_max=args.l_max, stop_mass=args.stop_mass)
    args.basename = "solve_report"
    meta = {"command": "solve", "system": args.system, "mode": args.mode,
            "seed": args.seed}
    _emit(args, report_to_dict(report),
          lambda p: write_iteration_csv(p, report, meta))
    _say(args, f"{report.solution_count} satisfying tuple(s); sampled "
               f"{report.sampled_tuple}")
    return 0


def cmd_replay_table1(args) -> int:
    report = replay_table1(progress=args.progress)
    rows = table1_comparison(report)
    args.basename = "replay_table1"
    meta = {"command": "replay-table1", "N": report.config["N"]}
    _emit(args, {"rows": rows, "config": report.config},
          lambda p: write_replay_csv(p, rows, meta))
    failed = [r for r in rows if not r.passed]
    for r in rows:
        tag = "ok" if r.passed else "FAIL"
        print(f"l={r.l:2d}  F={fmt_float(r.computed_fidelity):>24s}  "
              f"pr={fmt_float(r.computed_pr):>22s}  {tag}")
    if failed:
        print(f"{len(failed)} row(s) outside tolerance", file=sys.stderr)
        print(TABLE1_TIME_GRID_NOTE, file=sys.stderr)
        return 1
    print("all rows within tolerance")
    return 0


def cmd_stats(args) -> int:
    if args.samples < 2:
        raise _UsageError("--samples must be at least 2")
    master = SplitMix64(args.seed)
    reports = []
    for i in range(args.samples):
        config = FactoringConfig(
            N=args.n, params=_oscillator_params(args),
            alpha_schedule=_alpha_schedule(args), seed=master.derive(_STREAM_STATS + i),
            L_max=args.l_max, stop_fidelity=args.stop_fidelity,
        )
        reports.append(run_factoring(config))
    summary = summarize_trajectories(reports)
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    meta = {"command": "stats", "N": args.n, "seed": args.seed,
            "samples": args.samples}
    s_path = os.path.join(out_dir, "stats_summary.csv")
    l_path = os.path.join(out_dir, "stats_trajectories.csv")
    write_stats_summary_csv(s_path, summary, meta)
    write_stats_long_csv(l_path, reports, meta)
    print(f"wrote {s_path}\nwrote {l_path}")
    return 0


def _add_common(p, with_stop_fidelity=False, with_stop_mass=False):
    p.add_argument("--seed", type=int, default=0, help="deterministic run seed")
    p.add_argument("--alpha", type=float, default=2.0,
                   help="marker amplitude |alpha| (constant schedule)")
    p.add_argument("--alpha-schedule", default=None,
                   help="comma-separated |alpha| per iteration, non-decreasing")
    p.add_argument("--l-max", type=int, default=30, help="iteration cap")
    if with_stop_fidelity:
        p.add_argument("--stop-fidelity", type=float, default=0.99)
    if with_stop_mass:
        p.add_argument("--stop-mass", type=float, default=0.999999)
    p.add_argument("--out-dir", default=None, help="directory for report files")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="hoamp",
        description="Amplitude amplification on coupled oscillators: factoring, "
                    "search, integer constraint systems.",
        epilog="HOAMP_THREADS caps the worker pool for large ensembles.",
    )
    parser.add_argument("--version", action="version", version=f"hoamp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="factor an integer N")
    p.add_argument("--n", type=int, required=True, help="integer to factor")
    p.add_argument("--k-order", type=int, default=None,
                   help="coupling polynomial order K (default: len(--couplings))")
    p.add_argument("--couplings", default=None, help="comma-separated g_1..g_K")
    p.add_argument("--times", default=None,
                   help="explicit evolution times (default: seeded random)")
    p.add_argument("--progress", action="store_true")
    _add_common(p, with_stop_fidelity=True)
    p.set_defaults(fn=cmd_factor)

    p = sub.add_parser("search", help="amplify marked items of a black box")
    p.add_argument("--n", type=int, required=True, help="domain size")
    p.add_argument("--solutions", default=None, help="comma-separated marked indices")
    p.add_argument("--solutions-file", default=None,
                   help="file with a JSON array or whitespace-separated indices")
    _add_common(p, with_stop_mass=True)
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("solve", help="solve an integer constraint system")
    p.add_argument("--system", required=True, help="JSON file with the system")
    p.add_argument("--mode", choices=("max", "sum-clipped"), default="max")
    p.add_argument("--times", default=None)
    _add_common(p, with_stop_mass=True)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("replay-table1",
                       help="re-run the published factoring trajectory and diff it")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_replay_table1)

    p = sub.add_parser("stats", help="repeated factoring runs, mean/std per iteration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--k-order", type=int, default=None)
    p.add_argument("--couplings", default=None)
    _add_common(p, with_stop_fidelity=True)
    p.set_defaults(fn=cmd_stats)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except (ParseError, DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except (EmptyRange, NoFactorInRange, NoSolutionFound, InfeasibleSystem) as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return 4
    except (ConditionedMassVanished, DomainTooLarge, DimensionTooLarge,
            CutoffTooSmall, HoampError, OSError, MemoryError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
