"""
Export helpers for benchmark tables.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from .bench import AggregateRow, BenchRow, BenchTable

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
ROW_FIELDS = [
    "method",
    "n",
    "m",
    "seed",
    "l2_error",
    "max_pointwise_error",
    "iterations",
    "condition_number",
    "wall_time_ms",
]
AGGREGATE_FIELDS = [
    "method",
    "n",
    "m",
    "runs",
    "failed",
    "l2_error",
    "l2_error_min",
    "l2_error_max",
    "iterations",
    "iterations_min",
    "iterations_max",
    "condition_number",
    "condition_number_min",
    "condition_number_max",
]
POINTWISE_FIELDS = ["x", "abs_error"]


def _number(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf"
    return f"{value:.6e}"


def row_record(row: BenchRow) -> Dict[str, Any]:
    return {
        "method": row.method,
        "n": row.n,
        "m": row.m,
        "seed": row.seed,
        "l2_error": _number(row.l2_error),
        "max_pointwise_error": _number(row.max_pointwise_error),
        "iterations": row.iterations,
        "condition_number": _number(row.condition_number),
        "wall_time_ms": f"{row.wall_time_ms:.3f}",
    }


def _aggregate_record(aggregate: AggregateRow) -> Dict[str, Any]:
    record = {name: _number(getattr(aggregate, name)) for name in AGGREGATE_FIELDS[1:]}
    record["method"] = aggregate.method
    return record


def _write_csv(output: Path, fieldnames: List[str], records: Iterable[Dict[str, Any]]) -> str:
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        with output.open("w", newline="") as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=fieldnames)
            writer.writeheader()
            for record in records:
                writer.writerow(record)
    except OSError as exc:
        raise RuntimeError(f"Unable to write {output}: {exc}") from exc
    logger.info("Wrote %s", output)
    return str(output)


def sibling_path(output_path: str, suffix: str) -> Path:
    """``results/table.csv`` -> ``results/table<suffix>``."""
    output = Path(output_path)
    return output.with_name(output.stem + suffix)


def export_csv(table: BenchTable, output_path: str) -> str:
    """Raw rows, one line per (method, n, seed), in sorted order."""
    rows = sorted(table.rows, key=lambda row: (row.method, row.n, row.seed))
    return _write_csv(Path(output_path), ROW_FIELDS, (row_record(row) for row in rows))


def export_aggregates_csv(table: BenchTable, output_path: str) -> str:
    return _write_csv(
        Path(output_path), AGGREGATE_FIELDS, (_aggregate_record(agg) for agg in table.aggregates)
    )


def export_pointwise(table: BenchTable, output_path: str) -> List[str]:
    """One ``x,abs_error`` file per (method, n), taken from the median-error seed."""
    written = []
    by_key = {(row.method, row.n, row.seed): row for row in table.rows}
    for aggregate in table.aggregates:
        row = by_key.get((aggregate.method, aggregate.n, aggregate.median_seed))
        if row is None or row.pointwise is None:
            continue
        path = sibling_path(output_path, f".pointwise.{aggregate.method}.n{aggregate.n}.csv")
        records = (
            {"x": f"{x:.6f}", "abs_error": f"{err:.6e}"} for x, err in zip(row.grid, row.pointwise)
        )
        written.append(_write_csv(path, POINTWISE_FIELDS, records))
    return written


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def table_document(table: BenchTable) -> Dict[str, Any]:
    rows = []
    for row in table.rows:
        record = {name: _json_value(getattr(row, name)) for name in ROW_FIELDS}
        record.update(
            error_iterations=row.error_iterations,
            converged=row.converged,
            ls_deviation=_json_value(row.ls_deviation),
            error=row.error,
        )
        rows.append(record)
    aggregates = [
        {name: _json_value(getattr(agg, name)) for name in AGGREGATE_FIELDS} for agg in table.aggregates
    ]
    return {
        "config": table.config.to_dict(),
        "provenance": dict(table.provenance),
        "rows": rows,
        "aggregates": aggregates,
    }


def _write_json(document: Dict[str, Any], output_path: str) -> str:
    output_file = Path(output_path)
    temp_path: Optional[Path] = None
    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            mode="w",
            delete=False,
            dir=str(output_file.parent),
            prefix=output_file.name,
            suffix=".tmp",
        ) as tmp_file:
            temp_path = Path(tmp_file.name)
            json.dump(document, tmp_file, indent=2)
            tmp_file.flush()
            os.fsync(tmp_file.fileno())

        temp_path.replace(output_file)
        temp_path = None
    except OSError as exc:
        raise RuntimeError(f"Unable to write {output_file}: {exc}") from exc
    finally:
        if temp_path and temp_path.exists():
            temp_path.unlink(missing_ok=True)
    logger.info("Wrote %s", output_file)
    return str(output_file)


def export_json(table: BenchTable, output_path: str) -> str:
    """Write the whole table as one JSON document, atomically."""
    return _write_json(table_document(table), output_path)


def export_records(
    records: List[Dict[str, Any]], fieldnames: List[str], output_path: str, fmt: str = "csv"
) -> str:
    """Write flat records produced by the one-shot commands."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return _write_json({"rows": [{k: _json_value(v) for k, v in r.items()} for r in records]}, output_path)
    return _write_csv(Path(output_path), fieldnames, records)


def emit(table: BenchTable, fmt: str, path: str, pointwise: bool = True) -> List[str]:
    """Write ``table`` in ``fmt``; returns every path written."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        written = [export_json(table, path)]
    else:
        written = [
            export_csv(table, path),
            export_aggregates_csv(table, str(sibling_path(path, ".agg.csv"))),
        ]
    if pointwise:
        written.extend(export_pointwise(table, path))
    return written
