"""
Reconstruction pipelines from jittered Fourier frame coefficients.

Methods:
    new             -- W_n^{-1} Q_n S_m f over the integer Fourier basis
    cc              -- V_n^{-1} P_n S_m f over the first 2n+1 frame elements
    finite-section  -- truncated frame-operator moment system over the basis
    fourier         -- Fourier partial sum from integer-frequency coefficients
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .frames import INTEGER, FrameFamily, IndexSet, _readonly, gram, make_frame, synthesize
from .operators import assemble_V, assemble_W, finite_section, moment_rhs, section_map
from .sampling import (
    CoefVector,
    QuadratureRule,
    TargetFunction,
    default_quadrature,
    frame_coefficients,
)
from .solvers import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    MIN_PROBE,
    PROBE_FACTOR,
    FrameBounds,
    SolveReport,
    cg_solve,
    condition_number,
    direct_ls,
    estimate_frame_bounds,
    richardson_solve,
)

logger = logging.getLogger(__name__)

NEW = "new"
CC = "cc"
FINITE_SECTION = "finite-section"
FOURIER = "fourier"
METHODS = (NEW, CC, FINITE_SECTION, FOURIER)
SOLVERS = ("cg", "richardson", "direct")
DEFAULT_GRID_SIZE = 1024
REFINE_TOL = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    solver: str = "cg"
    bounds: Optional[FrameBounds] = None
    quadrature: Optional[QuadratureRule] = None
    grid_size: int = DEFAULT_GRID_SIZE
    section_m: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError(f"Tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.solver not in SOLVERS:
            raise ValueError(f"Unknown solver {self.solver!r}; expected one of {', '.join(SOLVERS)}")
        if self.grid_size < 2:
            raise ValueError(f"grid_size must be >= 2, got {self.grid_size}")


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    method: str
    function: str
    n: int
    m: int
    coefficients: CoefVector = field(repr=False)
    l2_error: float
    max_pointwise_error: float
    iterations: int
    condition_number: float
    seed: Optional[int]
    wall_time: float
    frame_id: str
    converged: bool = True
    status: str = "converged"
    relative_residual: float = 0.0
    error_iterations: Optional[int] = None
    ls_deviation: float = math.nan
    grid: np.ndarray = field(default=None, repr=False)
    pointwise: np.ndarray = field(default=None, repr=False)

    @property
    def wall_time_ms(self) -> float:
        return 1000.0 * self.wall_time


class ErrorMetrics(NamedTuple):
    l2_error: float
    max_pointwise: float
    pointwise: np.ndarray
    grid: np.ndarray


class _Solved(NamedTuple):
    coefficients: CoefVector
    expansion_frame: FrameFamily
    iterations: int
    condition: float
    report: Optional[SolveReport]
    error_iterations: Optional[int]
    ls_deviation: float


def uniform_grid(size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    return np.linspace(-1.0, 1.0, size)


def evaluate_expansion(coef: CoefVector, frame: FrameFamily, grid) -> np.ndarray:
    """Evaluate sum_j coef_j e^{-i pi lambda_j x} on the grid."""
    if coef.frame_id != frame.frame_id:
        raise ValueError(f"Coefficients belong to {coef.frame_id}, not {frame.frame_id}")
    frequencies = frame.extend(coef.index_set.half_width).frequencies_for(coef.index_set)
    return synthesize(coef.values, frequencies, grid)


def error_metrics(
    f: TargetFunction,
    coef: CoefVector,
    frame: FrameFamily,
    q: Optional[QuadratureRule] = None,
    grid=None,
) -> ErrorMetrics:
    """L2 error sqrt(1/2 int |f - recon|^2) by quadrature and |f - recon| on a grid."""
    q = q or default_quadrature(coef.index_set.half_width)
    grid = uniform_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < -1.0 or grid.max() > 1.0):
        raise ValueError("Grid points must lie in [-1, 1]")

    residual = f(q.nodes) - evaluate_expansion(coef, frame, q.nodes)
    l2_error = math.sqrt(max(0.5 * float(q.integrate(np.abs(residual) ** 2)), 0.0))
    pointwise = np.abs(f(grid) - evaluate_expansion(coef, frame, grid))
    max_pointwise = float(pointwise.max()) if pointwise.size else 0.0
    return ErrorMetrics(l2_error, max_pointwise, _readonly(pointwise), _readonly(grid.copy()))


def _relative_gap(x: np.ndarray, reference: np.ndarray) -> float:
    scale = np.linalg.norm(reference)
    gap = np.linalg.norm(x - reference)
    return float(gap / scale) if scale > 0 else float(gap)


def _numeric_bounds(frame: FrameFamily, n: int) -> FrameBounds:
    return estimate_frame_bounds(frame, max(MIN_PROBE, PROBE_FACTOR * n), max_n=n)


def _solve_moments(linear_map, cross, f_hat, frame, n, options: SolverOptions):
    """Solve a moment system with the configured solver, tracking the LS reference.

    The report (iterations, status, residual) is that of the solve at
    ``options.tol``. A converged solve is repeated down to REFINE_TOL and the
    refined iterate is returned.
    """
    reference = direct_ls(cross, f_hat)
    if options.solver == "direct":
        return reference, None, None, 0.0

    rhs = moment_rhs(cross, f_hat)
    if options.solver == "richardson":
        bounds = options.bounds or _numeric_bounds(frame, n)
        if linear_map.gram is not None and linear_map.metric is None:
            linear_map = dataclasses.replace(linear_map, metric=linear_map.gram)

    def solve(tol: float, max_iter: int, first_hit: list) -> SolveReport:
        def track(x: np.ndarray) -> None:
            first_hit.append(_relative_gap(x, reference.values) <= options.tol)

        if options.solver == "cg":
            return cg_solve(linear_map, rhs, tol, max_iter, callback=track)
        return richardson_solve(linear_map, rhs, bounds, tol, max_iter, callback=track)

    first_hit: list = []
    report = solve(options.tol, options.max_iter, first_hit)
    solution = report.solution
    if report.converged and options.tol > REFINE_TOL:
        first_hit = []
        refined = solve(REFINE_TOL, max(options.max_iter, DEFAULT_MAX_ITER), first_hit)
        if refined.final_relative_residual <= report.final_relative_residual:
            solution = refined.solution
    error_iterations = next((k + 1 for k, hit in enumerate(first_hit) if hit), None)
    deviation = _relative_gap(solution.values, reference.values)
    return solution, report, error_iterations, deviation


def _check_sizes(method: str, n: int, m: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if method != FOURIER and m < n:
        raise ValueError(f"Method {method!r} needs m >= n, got m={m}, n={n}")


def _run_new(f, frame, n, m, q, options) -> _Solved:
    sampling = frame.extend(m)
    basis = make_frame(INTEGER, n)
    f_hat = frame_coefficients(f, sampling, IndexSet(m), q)
    omega = gram(sampling, basis, IndexSet(m), IndexSet(n))
    w_map = assemble_W(omega, gram(basis, basis))
    coef, report, error_iterations, deviation = _solve_moments(
        w_map, omega, f_hat, sampling, n, options
    )
    iterations = report.iterations if report else 0
    return _Solved(coef, basis, iterations, condition_number(w_map), report, error_iterations, deviation)


def _run_cc(f, frame, n, m, q, options) -> _Solved:
    sampling = frame.extend(m)
    f_hat = frame_coefficients(f, sampling, IndexSet(m), q)
    psi_rect = gram(sampling, sampling, IndexSet(m), IndexSet(n))
    v_map = assemble_V(psi_rect, gram(sampling, sampling, IndexSet(n), IndexSet(n)))
    coef, report, error_iterations, deviation = _solve_moments(
        v_map, psi_rect, f_hat, sampling, n, options
    )
    iterations = report.iterations if report else 0
    return _Solved(coef, sampling, iterations, condition_number(v_map), report, error_iterations, deviation)


def _run_finite_section(f, frame, n, m, q, options) -> _Solved:
    section_m = options.section_m or m
    if section_m < n:
        raise ValueError(f"Finite-section truncation {section_m} is below n={n}")
    rows = max(m, section_m)
    sampling = frame.extend(rows)
    basis = make_frame(INTEGER, n)
    f_hat = frame_coefficients(f, sampling, IndexSet(m), q)
    psi_to_phi = gram(sampling, basis, IndexSet(rows), IndexSet(n))
    moments = moment_rhs(psi_to_phi.block(rows=IndexSet(m)), f_hat)
    coef = finite_section(psi_to_phi, moments, section_m)
    condition = condition_number(section_map(psi_to_phi, section_m))
    return _Solved(coef, basis, 0, condition, None, None, math.nan)


def _run_fourier(f, n, q) -> _Solved:
    basis = make_frame(INTEGER, n)
    coef = frame_coefficients(f, basis, IndexSet(n), q)
    return _Solved(coef, basis, 0, 1.0, None, None, math.nan)


def reconstruct(
    method: str,
    f: TargetFunction,
    frame: FrameFamily,
    n: int,
    m: int,
    options: Optional[SolverOptions] = None,
) -> ReconstructionResult:
    """Reconstruct f on [-1, 1] from its frame coefficients <f, psi_j>, |j| <= m."""
    if method not in METHODS:
        raise ValueError(f"Unknown method {method!r}; expected one of {', '.join(METHODS)}")
    options = options or SolverOptions()
    if method == FOURIER:
        m = n
    _check_sizes(method, n, m)
    q = options.quadrature or default_quadrature(max(m, n, options.section_m or 0))

    start = time.perf_counter()
    if method == NEW:
        solved = _run_new(f, frame, n, m, q, options)
    elif method == CC:
        solved = _run_cc(f, frame, n, m, q, options)
    elif method == FINITE_SECTION:
        solved = _run_finite_section(f, frame, n, m, q, options)
    else:
        solved = _run_fourier(f, n, q)
    wall_time = time.perf_counter() - start

    metrics = error_metrics(f, solved.coefficients, solved.expansion_frame, q, uniform_grid(options.grid_size))
    report = solved.report
    result = ReconstructionResult(
        method=method,
        function=f.name,
        n=n,
        m=m,
        coefficients=solved.coefficients,
        l2_error=metrics.l2_error,
        max_pointwise_error=metrics.max_pointwise,
        iterations=solved.iterations,
        condition_number=solved.condition,
        seed=frame.seed,
        wall_time=wall_time,
        frame_id=solved.expansion_frame.frame_id,
        converged=report.converged if report else True,
        status=report.status if report else "converged",
        relative_residual=report.final_relative_residual if report else 0.0,
        error_iterations=solved.error_iterations,
        ls_deviation=solved.ls_deviation,
        grid=metrics.grid,
        pointwise=metrics.pointwise,
    )
    logger.info(
        "%s %s n=%d m=%d: l2 %.3e, %d iterations, cond %.3g",
        method,
        f.name,
        n,
        m,
        result.l2_error,
        result.iterations,
        result.condition_number,
    )
    return result
