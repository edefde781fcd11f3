"""
Command-line interface for framerecon using argparse.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .bench import (
    FACTOR_RULE,
    BenchConfig,
    BenchRow,
    example_config,
    run_benchmark,
)
from .exporters import FORMATS, ROW_FIELDS, emit, export_records, row_record
from .frames import INTEGER, JITTERED, KADEC_BOUND, IndexSet, gram, make_frame
from .reconstruct import METHODS, SOLVERS, SolverOptions, reconstruct
from .sampling import TEST_FUNCTIONS, frame_coefficients, test_function
from .solvers import DEFAULT_TOL, estimate_frame_bounds
from .theory import M_RULES, bound_certificate, coefficient_decay, estimate_localization
from .utils import default_output_dir

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _int_list(text: str) -> List[int]:
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("List must not be empty")
    return values


def _str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _default_out(stem: str, fmt: str) -> str:
    return str(Path(default_output_dir()) / f"{stem}.{fmt}")


def _bench_config(args: argparse.Namespace) -> BenchConfig:
    if args.config:
        config = BenchConfig.from_file(args.config)
    else:
        config = example_config(args.example or 1)

    overrides = {}
    if args.seed_list:
        overrides["seeds"] = tuple(args.seed_list)
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.function:
        overrides["function"] = args.function
    if args.n_list:
        overrides["n_values"] = tuple(args.n_list)
    if args.methods is not None:
        overrides["methods"] = tuple(args.methods)
    if args.m_factor is not None:
        overrides["m_rule"] = FACTOR_RULE
        overrides["m_factor"] = args.m_factor
    if args.m_rule:
        overrides["m_rule"] = args.m_rule
    if args.solver:
        overrides["solver"] = args.solver
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _bench_config(args)
    stem = f"example{args.example}" if args.example and not args.config else "bench"
    output = args.out or config.output or _default_out(stem, args.format)

    table = run_benchmark(config, workers=args.workers)

    print(f"Function: {config.function}  Seeds: {','.join(map(str, config.seeds))}  Tol: {config.tol:g}")
    print(f"{'method':<15}{'n':>6}{'m':>6}{'l2_error':>12}{'iterations':>12}{'condition':>12}")
    for agg in table.aggregates:
        print(
            f"{agg.method:<15}{agg.n:>6}{agg.m:>6}{agg.l2_error:>12.2e}"
            f"{agg.iterations:>12g}{agg.condition_number:>12.2f}"
        )
    for path in emit(table, args.format, output, pointwise=not args.no_pointwise):
        print(f"Wrote {path}")

    if table.has_failures():
        print(f"\n{len(table.failed)} of {len(table.rows)} rows failed:", file=sys.stderr)
        for row in table.failed:
            print(f"  * {row.method} n={row.n} seed={row.seed}: {row.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _write_out(args: argparse.Namespace, records: List[dict], fieldnames: List[str]) -> None:
    if args.out:
        print(f"Wrote {export_records(records, fieldnames, args.out, args.format)}")


def _cmd_reconstruct(args: argparse.Namespace) -> int:
    m = args.m if args.m is not None else int(math.ceil(1.4 * args.n - 1e-9))
    options = SolverOptions(
        tol=args.tol if args.tol is not None else DEFAULT_TOL,
        solver=args.solver or "cg",
        section_m=args.section_m,
    )
    target = test_function(args.function)
    records = []
    failed = 0
    print(",".join(ROW_FIELDS))
    for seed in args.seed_list or [1]:
        frame = make_frame(JITTERED, max(m, args.section_m or 0), args.delta, seed)
        result = reconstruct(args.method, target, frame, args.n, m, options)
        row = BenchRow.from_result(result, seed)
        printable = row_record(row)
        print(",".join(str(printable[name]) for name in ROW_FIELDS))
        records.append({name: getattr(row, name) for name in ROW_FIELDS})
        failed += row.failed
    _write_out(args, records, ROW_FIELDS)
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_localization(args: argparse.Namespace) -> int:
    idx = IndexSet(args.half_width)
    records = []
    print(f"{'seed':>6}{'c':>12}{'s':>10}{'residual':>12}  saturated")
    for seed in args.seed_list or [1]:
        frame = make_frame(JITTERED, args.half_width, args.delta, seed)
        other = frame if args.pair == "self" else make_frame(INTEGER, args.half_width)
        fit = estimate_localization(gram(frame, other, idx, idx))
        print(f"{seed:>6}{fit.c:>12.4g}{fit.s:>10.4f}{fit.residual:>12.3e}  {fit.saturated}")
        record = {"seed": seed, "c": fit.c, "s": fit.s, "residual": fit.residual, "saturated": fit.saturated}
        if args.function:
            decay = coefficient_decay(frame_coefficients(test_function(args.function), frame, idx))
            print(f"{'':>6}coefficient decay of {args.function}: c={decay.c:.4g} s={decay.s:.4f}")
            record.update(coefficient_c=decay.c, coefficient_s=decay.s)
        records.append(record)
    _write_out(args, records, list(records[0]))
    return EXIT_OK


def _cmd_bounds(args: argparse.Namespace) -> int:
    records = []
    print(f"{'seed':>6}{'A':>12}{'B':>12}  method")
    for seed in args.seed_list or [1]:
        frame = make_frame(JITTERED, args.probe, args.delta, seed)
        bounds = estimate_frame_bounds(frame, args.probe, max_n=args.max_n)
        print(f"{seed:>6}{bounds.A:>12.6f}{bounds.B:>12.6f}  {bounds.method}")
        record = {"seed": seed, "A": bounds.A, "B": bounds.B, "method": bounds.method}
        if args.certificate:
            n, m = args.certificate
            constants = bound_certificate(frame, n, m)
            print(
                f"{'':>6}n={n} m={m}: A_mn={constants.A_mn:.4e} "
                f"B_mn_bound={constants.B_mn_bound:.4e} B_mn_exact={constants.B_mn_exact:.4e}"
            )
            record.update(
                n=n, m=m, A_mn=constants.A_mn, B_mn_bound=constants.B_mn_bound, B_mn_exact=constants.B_mn_exact
            )
        records.append(record)
    _write_out(args, records, list(records[0]))
    return EXIT_OK


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """--seed-list, --tol, --out and --format, accepted before or after the subcommand."""

    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed-list", type=_int_list, default=default(None), help="Comma-separated jitter seeds")
    parser.add_argument("--tol", type=float, default=default(None), help="Relative residual tolerance")
    parser.add_argument("--out", default=default(None), help="Output file")
    parser.add_argument("--format", choices=FORMATS, default=default("csv"), help="Output format")
    parser.add_argument(
        "-v", "--verbose", action="count", default=default(0), help="-v for INFO, -vv for DEBUG"
    )


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="framerecon", description="Frame reconstruction benchmarks")
    _add_global_flags(parser, suppress=False)
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    bench_parser = subparsers.add_parser("bench", parents=[common], help="Run a benchmark sweep")
    bench_parser.add_argument("--example", type=int, choices=[1, 2, 3])
    bench_parser.add_argument("--config", help="JSON benchmark configuration")
    bench_parser.add_argument("--function", choices=sorted(TEST_FUNCTIONS))
    bench_parser.add_argument("--n-list", type=_int_list)
    bench_parser.add_argument("--methods", type=_str_list)
    bench_parser.add_argument("--m-factor", type=float)
    bench_parser.add_argument("--m-rule", choices=list(M_RULES))
    bench_parser.add_argument("--solver", choices=list(SOLVERS))
    bench_parser.add_argument("--workers", type=int)
    bench_parser.add_argument("--no-pointwise", action="store_true", help="Skip pointwise error dumps")
    bench_parser.set_defaults(func=_cmd_bench)

    recon_parser = subparsers.add_parser("reconstruct", parents=[common], help="Reconstruct one target")
    recon_parser.add_argument("--method", choices=list(METHODS), default="new")
    recon_parser.add_argument("--function", choices=sorted(TEST_FUNCTIONS), default="gaussian")
    recon_parser.add_argument("--n", type=int, default=16)
    recon_parser.add_argument("--m", type=int)
    recon_parser.add_argument("--delta", type=float, default=KADEC_BOUND)
    recon_parser.add_argument("--solver", choices=list(SOLVERS))
    recon_parser.add_argument("--section-m", type=int)
    recon_parser.set_defaults(func=_cmd_reconstruct)

    loc_parser = subparsers.add_parser("localization", parents=[common], help="Fit Gram decay")
    loc_parser.add_argument("--half-width", type=int, default=128)
    loc_parser.add_argument("--delta", type=float, default=KADEC_BOUND)
    loc_parser.add_argument("--pair", choices=["cross", "self"], default="cross")
    loc_parser.add_argument("--function", choices=sorted(TEST_FUNCTIONS))
    loc_parser.set_defaults(func=_cmd_localization)

    bounds_parser = subparsers.add_parser("bounds", parents=[common], help="Numeric frame bounds")
    bounds_parser.add_argument("--probe", type=int, default=64)
    bounds_parser.add_argument("--delta", type=float, default=KADEC_BOUND)
    bounds_parser.add_argument("--max-n", type=int)
    bounds_parser.add_argument("--certificate", type=int, nargs=2, metavar=("N", "M"))
    bounds_parser.set_defaults(func=_cmd_bounds)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
