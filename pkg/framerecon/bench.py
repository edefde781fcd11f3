"""
Configuration-driven benchmark sweeps over method x n x seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import platform
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy

from . import __version__
from .frames import JITTERED, KADEC_BOUND, RNG_NAME, make_frame
from .reconstruct import FOURIER, METHODS, SOLVERS, ReconstructionResult, SolverOptions, reconstruct
from .sampling import DEFAULT_ORDER, DEFAULT_PANELS, TEST_FUNCTIONS, build_quadrature, test_function
from .solvers import MIN_PROBE, PROBE_FACTOR, estimate_frame_bounds
from .theory import M_RULES, choose_m
from .utils import default_workers

logger = logging.getLogger(__name__)

FACTOR_RULE = "factor"
DEFAULT_N_VALUES = (16, 32, 64, 128, 256)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)
DEFAULT_METHODS = ("cc", "new", "fourier")
RULE_PARAMS = ("A", "c", "s", "lambda_min", "alpha", "t")
NON_SEMANTIC = ("output",)


class ConfigError(ValueError):
    """Raised when a benchmark configuration is invalid."""


@dataclass(frozen=True)
class BenchConfig:
    function: str = "gaussian"
    n_values: Tuple[int, ...] = DEFAULT_N_VALUES
    methods: Tuple[str, ...] = DEFAULT_METHODS
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    delta: float = KADEC_BOUND
    m_rule: str = FACTOR_RULE
    m_factor: float = 1.4
    m_params: Mapping[str, float] = field(default_factory=dict)
    panels: Optional[int] = None
    order: int = DEFAULT_ORDER
    tol: float = 1e-5
    max_iter: int = 500
    solver: str = "cg"
    section_m_factor: Optional[float] = None
    grid_size: int = 1024
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.function not in TEST_FUNCTIONS:
            raise ConfigError(
                f"Unknown function {self.function!r}; expected one of {', '.join(TEST_FUNCTIONS)}"
            )
        if not self.n_values:
            raise ConfigError("n list must not be empty")
        if any(n < 1 for n in self.n_values):
            raise ConfigError(f"n values must be positive, got {list(self.n_values)}")
        if not self.seeds:
            raise ConfigError("Seed list must not be empty")
        if any(seed < 0 for seed in self.seeds):
            raise ConfigError(f"Seeds must be nonnegative, got {list(self.seeds)}")
        unknown = [method for method in self.methods if method not in METHODS]
        if unknown:
            raise ConfigError(f"Unknown methods {unknown}; expected any of {', '.join(METHODS)}")
        if not 0.0 <= self.delta <= KADEC_BOUND:
            raise ConfigError(f"delta must lie in [0, {KADEC_BOUND}], got {self.delta}")
        if self.m_rule != FACTOR_RULE and self.m_rule not in M_RULES:
            raise ConfigError(
                f"Unknown m rule {self.m_rule!r}; expected {FACTOR_RULE} or one of {', '.join(M_RULES)}"
            )
        if self.m_factor < 1.0:
            raise ConfigError(f"m factor must be >= 1, got {self.m_factor}")
        extra = sorted(set(self.m_params) - set(RULE_PARAMS))
        if extra:
            raise ConfigError(f"Unknown m rule parameters {extra}; expected any of {', '.join(RULE_PARAMS)}")
        if not self.tol > 0:
            raise ConfigError(f"Tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"Unknown solver {self.solver!r}; expected one of {', '.join(SOLVERS)}")
        if self.panels is not None and self.panels < 1:
            raise ConfigError(f"panels must be >= 1, got {self.panels}")
        if self.order < 2:
            raise ConfigError(f"order must be >= 2, got {self.order}")
        if self.section_m_factor is not None and self.section_m_factor < 1.0:
            raise ConfigError(f"section m factor must be >= 1, got {self.section_m_factor}")
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be >= 2, got {self.grid_size}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> BenchConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys {unknown}")
        values = dict(data)
        try:
            for key in ("n_values", "seeds"):
                if key in values:
                    values[key] = tuple(_as_int(item, key) for item in values[key])
            if "methods" in values:
                values["methods"] = tuple(str(item) for item in values["methods"])
            if "m_params" in values:
                values["m_params"] = {str(k): float(v) for k, v in dict(values["m_params"]).items()}
            for key in ("delta", "m_factor", "tol"):
                if key in values:
                    values[key] = float(values[key])
            for key in ("order", "max_iter", "grid_size"):
                if key in values:
                    values[key] = _as_int(values[key], key)
            if values.get("panels") is not None:
                values["panels"] = _as_int(values["panels"], "panels")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"Malformed config value: {exc}") from exc
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> BenchConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"Unable to read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Failed to parse config file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("n_values", "methods", "seeds"):
            data[key] = list(data[key])
        data["m_params"] = dict(sorted(self.m_params.items()))
        return data

    def semantic_dict(self) -> Dict[str, Any]:
        data = self.to_dict()
        for key in NON_SEMANTIC:
            data.pop(key, None)
        return data


def _as_int(value: Any, key: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"{key} must hold integers, got {value!r}")
    return int(value)


def example_config(number: int) -> BenchConfig:
    """Preset sweeps: 1 gaussian (m = 1.4n), 2 cospoly (m = 1.2n), 3 bump6 (m = 1.4n)."""
    presets = {
        1: BenchConfig(function="gaussian", m_factor=1.4),
        2: BenchConfig(function="cospoly", m_factor=1.2),
        3: BenchConfig(function="bump6", m_factor=1.4),
    }
    try:
        return presets[number]
    except KeyError as exc:
        raise ConfigError(f"Unknown example {number}; expected 1, 2 or 3") from exc


def config_hash(config: BenchConfig) -> str:
    canonical = json.dumps(config.semantic_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@lru_cache(maxsize=64)
def numeric_lower_bound(seed: int, delta: float, probe: int) -> float:
    """Numeric lower frame bound A of one seeded jittered frame, shared by the rows of a sweep."""
    frame = make_frame(JITTERED, probe, delta, seed)
    return estimate_frame_bounds(frame, probe).A


def compute_m(config: BenchConfig, n: int, seed: int) -> int:
    """Sampling half-width for one row; choose_m rules use numeric A unless A is configured."""
    if config.m_rule == FACTOR_RULE:
        return int(math.ceil(config.m_factor * n - 1e-9))
    params = dict(config.m_params)
    lower = params.pop("A", None)
    if lower is None:
        probe = max(MIN_PROBE, PROBE_FACTOR * max(config.n_values))
        lower = numeric_lower_bound(seed, config.delta, probe)
    return choose_m(config.m_rule, n, lower, **params)


@dataclass(frozen=True, eq=False)
class BenchRow:
    method: str
    n: int
    m: int
    seed: int
    l2_error: float = math.nan
    max_pointwise_error: float = math.nan
    iterations: int = 0
    error_iterations: Optional[int] = None
    condition_number: float = math.nan
    wall_time_ms: float = 0.0
    converged: bool = False
    ls_deviation: float = math.nan
    error: Optional[str] = None
    grid: Optional[np.ndarray] = field(default=None, repr=False)
    pointwise: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def failed(self) -> bool:
        return self.error is not None

    @classmethod
    def from_result(cls, result: ReconstructionResult, seed: int) -> BenchRow:
        return cls(
            method=result.method,
            n=result.n,
            m=result.m,
            seed=seed,
            l2_error=result.l2_error,
            max_pointwise_error=result.max_pointwise_error,
            iterations=result.iterations,
            error_iterations=result.error_iterations,
            condition_number=result.condition_number,
            wall_time_ms=result.wall_time_ms,
            converged=result.converged,
            ls_deviation=result.ls_deviation,
            error=None if result.converged else f"solver status {result.status}",
            grid=result.grid,
            pointwise=result.pointwise,
        )


@dataclass(frozen=True)
class AggregateRow:
    method: str
    n: int
    m: int
    runs: int
    failed: int
    l2_error: float
    l2_error_min: float
    l2_error_max: float
    iterations: float
    iterations_min: int
    iterations_max: int
    condition_number: float
    condition_number_min: float
    condition_number_max: float
    median_seed: Optional[int] = None


@dataclass(frozen=True, eq=False)
class BenchTable:
    config: BenchConfig
    rows: Tuple[BenchRow, ...]
    aggregates: Tuple[AggregateRow, ...]
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> List[BenchRow]:
        return [row for row in self.rows if row.failed]

    def has_failures(self) -> bool:
        return bool(self.failed)


def _median_seed(rows: List[BenchRow]) -> int:
    ranked = sorted(rows, key=lambda row: (row.l2_error, row.seed))
    return ranked[(len(ranked) - 1) // 2].seed


def aggregate(rows: List[BenchRow]) -> Tuple[AggregateRow, ...]:
    """Median/min/max over seeds for each (method, n)."""
    groups: Dict[Tuple[str, int], List[BenchRow]] = {}
    for row in rows:
        groups.setdefault((row.method, row.n), []).append(row)

    aggregates = []
    for (method, n), group in sorted(groups.items()):
        ok = [row for row in group if not math.isnan(row.l2_error)]
        failed = sum(row.failed for row in group)
        if not ok:
            aggregates.append(
                AggregateRow(method, n, group[0].m, len(group), failed, math.nan, math.nan, math.nan,
                             math.nan, 0, 0, math.nan, math.nan, math.nan)
            )
            continue
        errors = [row.l2_error for row in ok]
        iterations = [row.iterations for row in ok]
        conditions = [row.condition_number for row in ok]
        aggregates.append(
            AggregateRow(
                method=method,
                n=n,
                m=int(statistics.median_low([row.m for row in ok])),
                runs=len(group),
                failed=failed,
                l2_error=statistics.median(errors),
                l2_error_min=min(errors),
                l2_error_max=max(errors),
                iterations=statistics.median(iterations),
                iterations_min=min(iterations),
                iterations_max=max(iterations),
                condition_number=statistics.median(conditions),
                condition_number_min=min(conditions),
                condition_number_max=max(conditions),
                median_seed=_median_seed(ok),
            )
        )
    return tuple(aggregates)


def _run_row(config: BenchConfig, method: str, n: int, seed: int) -> BenchRow:
    m = n
    try:
        m = n if method == FOURIER else compute_m(config, n, seed)
        section_m = None
        if config.section_m_factor is not None:
            section_m = int(math.ceil(config.section_m_factor * m - 1e-9))
        rows = max(m, section_m or 0)
        quadrature = build_quadrature(config.panels or max(DEFAULT_PANELS, rows), config.order)
        options = SolverOptions(
            tol=config.tol,
            max_iter=config.max_iter,
            solver=config.solver,
            quadrature=quadrature,
            grid_size=config.grid_size,
            section_m=section_m,
        )
        frame = make_frame(JITTERED, rows, config.delta, seed)
        result = reconstruct(method, test_function(config.function), frame, n, m, options)
    except Exception as exc:  # recorded in the row; the sweep continues
        logger.warning("Row %s n=%d seed=%d failed: %s", method, n, seed, exc)
        return BenchRow(method=method, n=n, m=m, seed=seed, error=f"{type(exc).__name__}: {exc}")
    return BenchRow.from_result(result, seed)


def _provenance(config: BenchConfig, started: datetime, finished: datetime) -> Dict[str, Any]:
    return {
        "config_hash": config_hash(config),
        "framerecon": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "rng": RNG_NAME,
        "started_at": started.isoformat(),
        "finished_at": finished.isoformat(),
    }


def run_benchmark(config: BenchConfig, workers: Optional[int] = None) -> BenchTable:
    """Run every (method, n, seed) row and aggregate over seeds."""
    workers = workers or default_workers()
    tasks = [(method, n, seed) for method in config.methods for n in config.n_values for seed in config.seeds]
    logger.info(
        "Running %d rows (%s, config %s) on %d workers",
        len(tasks),
        config.function,
        config_hash(config),
        workers,
    )
    started = datetime.now(timezone.utc)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda task: _run_row(config, *task), tasks))
    finished = datetime.now(timezone.utc)

    rows.sort(key=lambda row: (row.method, row.n, row.seed))
    table = BenchTable(config, tuple(rows), aggregate(rows), _provenance(config, started, finished))
    if table.has_failures():
        logger.warning("%d of %d rows failed", len(table.failed), len(rows))
    return table
