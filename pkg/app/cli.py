"""
Command Line Interface

    python -m app.cli solve INSTANCE [--time-limit S] [--u0 V] [--json]
    python -m app.cli bench DIRECTORY [--csv FILE] [--threads K]
    python -m app.cli bound INSTANCE
    python -m app.cli opp INSTANCE
    python -m app.cli preprocess INSTANCE

Exit codes: 0 success, 2 unreadable or malformed input, 3 a result failed
verification.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from app.config.settings import get_settings
from app.services.bench_service import format_table, run_bench, write_bench_csv
from app.services.dff_service import bound_report
from app.services.exceptions import InstanceParseError, InvariantViolation
from app.services.instance_service import FORMATS, read_instance, solution_to_json, verify_placement
from app.services.master_service import MasterConfig, solve
from app.services.opp_service import opp_check
from app.services.preprocess_service import preprocess_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--time-limit", type=float, help="wall-clock limit per instance, seconds")
    parser.add_argument("--alpha", type=int, help="DFF pairs used as bin inequalities")
    parser.add_argument("--beta", type=int, help="scale pairs used as bin inequalities")
    parser.add_argument("--gamma", type=int, help="randomized MIS passes")
    parser.add_argument("--tilde-n", type=int, help="OPP suppression threshold")
    parser.add_argument("--eta", type=int, help="conservative scale iterations")
    parser.add_argument("--seed", type=int, help="seed of the randomized MIS passes")
    parser.add_argument("--u0", type=int, help="known solution value (GivenU0 start)")
    parser.add_argument("--solve-log", help="append solve events to this JSON-lines file")


def _input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, help="instance format, inferred from the suffix by default")
    parser.add_argument("--dims-order", choices=("wh", "hw"), help="dimension order inside the file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpp2d", description="Exact two-dimensional bin packing")
    parser.add_argument("--log-level", help="logging level (default from BPP_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_cmd = commands.add_parser("solve", help="solve one instance")
    solve_cmd.add_argument("instance")
    _input_flags(solve_cmd)
    _solver_flags(solve_cmd)
    solve_cmd.add_argument("--json", action="store_true", help="print the JSON export")

    bench_cmd = commands.add_parser("bench", help="solve a directory and print the grouped table")
    bench_cmd.add_argument("directory")
    bench_cmd.add_argument("--dims-order", choices=("wh", "hw"))
    bench_cmd.add_argument("--threads", type=int, help="worker processes")
    bench_cmd.add_argument("--csv", help="write per-instance and group rows to this CSV file")
    _solver_flags(bench_cmd)

    bound_cmd = commands.add_parser("bound", help="print the lower bounds of one instance")
    bound_cmd.add_argument("instance")
    bound_cmd.add_argument("--eta", type=int)
    _input_flags(bound_cmd)

    opp_cmd = commands.add_parser("opp", help="check whether all items of an instance fit one bin")
    opp_cmd.add_argument("instance")
    opp_cmd.add_argument("--time-limit", type=float)
    _input_flags(opp_cmd)

    pre_cmd = commands.add_parser("preprocess", help="print the preprocessing outcome")
    pre_cmd.add_argument("instance")
    _input_flags(pre_cmd)
    return parser


def _config(args: argparse.Namespace) -> MasterConfig:
    return MasterConfig.from_settings(
        time_limit=args.time_limit,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        tilde_n=args.tilde_n,
        eta=args.eta,
        seed=args.seed,
        u0=args.u0,
        solve_log=args.solve_log,
    )


def _read(args: argparse.Namespace):
    return read_instance(args.instance, fmt=args.format, dims_order=args.dims_order or get_settings().dims_order)


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _read(args)
    sol = solve(inst, _config(args))
    if args.json:
        print(json.dumps(solution_to_json(sol), indent=2))
        return EXIT_OK
    print(f"instance: {inst.name}  n={inst.n}  bin={inst.W}x{inst.H}")
    print(f"status:   {sol.status.value}")
    print(f"L={sol.lower_bound}  U={sol.upper_bound}{'  (external)' if sol.external_bound else ''}")
    print(f"time:     {sol.stats.seconds:.2f}s  (start {sol.stats.sec0:.2f}s, OPP {sol.stats.opp_seconds:.2f}s)")
    print(f"OPP calls: {sol.stats.opp_calls}  memo hits: {sol.stats.memo_hits}  cuts: {sol.stats.cuts_added}  nodes: {sol.stats.nodes}")
    for b, packed in enumerate(sol.bins):
        coords = " ".join(f"{j}@{packed.placement.coords[j]}" for j in sorted(packed.items))
        print(f"  bin {b}: {coords}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        logger.error(f"❌ Not a directory: {directory}")
        return EXIT_INPUT
    threads = args.threads or get_settings().threads
    rows, groups = run_bench(directory, _config(args), threads=threads, dims_order=args.dims_order or get_settings().dims_order)
    for row in rows:
        if row.error:
            print(f"# skipped {row.name}: {row.error}")
    print(format_table(groups))
    if args.csv:
        write_bench_csv(Path(args.csv), rows, groups)
        logger.info(f"✅ Wrote {len(rows)} instance rows and {len(groups)} group rows to {args.csv}")
    return EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    inst = _read(args)
    report = bound_report(inst, args.eta or get_settings().eta)
    for key, value in report.to_dict().items():
        print(f"{key:>12}: {value}")
    return EXIT_OK


def cmd_opp(args: argparse.Namespace) -> int:
    inst = _read(args)
    result = opp_check(inst.items, inst.W, inst.H, time_limit=args.time_limit)
    print(f"verdict: {result.verdict.value}  nodes={result.nodes}  seconds={result.seconds:.3f}")
    if result.feasible:
        violation = verify_placement(dict(enumerate(inst.dims)), inst.W, inst.H, range(inst.n), result.placement)
        if violation:
            raise InvariantViolation(f"placement rejected: {violation}")
        for j in range(inst.n):
            print(f"  {j}: {result.placement.coords[j]}")
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    inst = _read(args)
    report = preprocess_report(inst)
    print(f"removed: {report.removed_pct:.1f}%  fixed bins: {report.fixed_bins}  remaining items: {report.remaining}")
    print(f"reduced bin W*xH*: {report.reduced_bin[0]}x{report.reduced_bin[1]}  after removal: {report.shrunk_bin[0]}x{report.shrunk_bin[1]}")
    print(f"L'c: {float(report.lc_reduced):.4f}")
    for j, (old, new) in sorted(report.enlarged.items()):
        print(f"  item {j}: {old[0]}x{old[1]} -> {new[0]}x{new[1]}")
    for j, rule in report.removed_items:
        print(f"  item {j} removed ({rule})")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "bound": cmd_bound,
    "opp": cmd_opp,
    "preprocess": cmd_preprocess,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or get_settings().log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return COMMANDS[args.command](args)
    except InstanceParseError as e:
        logger.error(f"❌ {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as e:
        logger.error(f"❌ Invariant violated: {e}")
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
