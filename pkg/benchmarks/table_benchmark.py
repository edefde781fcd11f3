"""
Time the preset benchmark sweeps.

Run:
    python benchmarks/table_benchmark.py --example 1 --workers 4
"""
import argparse
import dataclasses
import logging
import time

from framerecon.bench import example_config, run_benchmark


def run(example: int, workers: int, n_values=None) -> float:
    config = example_config(example)
    if n_values:
        config = dataclasses.replace(config, n_values=tuple(n_values))
    start = time.perf_counter()
    table = run_benchmark(config, workers=workers)
    elapsed = time.perf_counter() - start
    for agg in table.aggregates:
        print(f"{agg.method:<15}{agg.n:>6}{agg.l2_error:>12.2e}{agg.iterations:>8g}{agg.condition_number:>10.2f}")
    if table.has_failures():
        print(f"{len(table.failed)} rows failed")
    return elapsed


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--example", type=int, choices=[1, 2, 3], default=1)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--n", type=int, nargs="*", help="Override the n list")
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)
    elapsed = run(args.example, args.workers, args.n)
    print(f"Example {args.example} swept in {elapsed:.2f}s on {args.workers} worker(s)")


if __name__ == "__main__":
    main()
