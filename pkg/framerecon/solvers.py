"""
Solvers for the Hermitian positive semidefinite moment systems.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg as spla

from .frames import (
    INTEGER,
    CrossGram,
    FrameFamily,
    SingularSystemError,
    _readonly,
    gram,
    gram_solve,
    make_frame,
)
from .operators import LinearMap
from .sampling import CoefVector

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITER = 500
BREAKDOWN = 1e-300
DIVERGENCE_STEPS = 10
MIN_PROBE = 8
PROBE_FACTOR = 4

EIGEN_NUMERIC = "eigen-numeric"
USER_SUPPLIED = "user-supplied"
BOUND_METHODS = (EIGEN_NUMERIC, USER_SUPPLIED)

CONVERGED = "converged"
MAX_ITER = "max_iter"
STAGNATION = "stagnation"
DIVERGED = "diverged"

IterateCallback = Callable[[np.ndarray], None]

__all__ = [
    "FrameBounds",
    "SingularSystemError",
    "SolveReport",
    "cg_solve",
    "condition_number",
    "direct_ls",
    "estimate_frame_bounds",
    "richardson_solve",
]


@dataclass(frozen=True)
class SolveReport:
    solution: CoefVector
    iterations: int
    final_relative_residual: float
    converged: bool
    status: str = CONVERGED
    residual_history: Tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    method: str = USER_SUPPLIED

    def __post_init__(self) -> None:
        if not (0.0 < self.A <= self.B) or not math.isfinite(self.B):
            raise ValueError(f"Frame bounds need 0 < A <= B, got A={self.A}, B={self.B}")
        if self.method not in BOUND_METHODS:
            raise ValueError(
                f"Unknown bound method {self.method!r}; expected one of {', '.join(BOUND_METHODS)}"
            )


class _KrylovSystem:
    """The operator form of a moment system with its inner product."""

    def __init__(self, linear_map: LinearMap, rhs: CoefVector) -> None:
        if rhs.values.shape != (linear_map.dimension,):
            raise ValueError(
                f"Right-hand side of length {rhs.values.size} does not match "
                f"map dimension {linear_map.dimension}"
            )
        self.metric = linear_map.metric
        if self.metric is None:
            self.apply = linear_map.apply
            self.b = np.asarray(rhs.values, dtype=np.complex128)
        else:
            self.apply = linear_map.operator_apply
            self.b = gram_solve(self.metric, rhs.values)

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        if self.metric is None:
            return np.vdot(y, x)
        return np.vdot(y, self.metric @ x)

    def norm(self, x: np.ndarray) -> float:
        return math.sqrt(max(self.inner(x, x).real, 0.0))


def _report(
    rhs: CoefVector,
    frame_id: str,
    solution: np.ndarray,
    iterations: int,
    residual: float,
    status: str,
    history: List[float],
) -> SolveReport:
    coef = CoefVector(rhs.index_set, _readonly(solution.copy()), frame_id)
    return SolveReport(
        solution=coef,
        iterations=iterations,
        final_relative_residual=float(residual),
        converged=status == CONVERGED,
        status=status,
        residual_history=tuple(history),
    )


def _check_controls(tol: float, max_iter: int) -> None:
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")


def cg_solve(
    linear_map: LinearMap,
    rhs: CoefVector,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    callback: Optional[IterateCallback] = None,
) -> SolveReport:
    """Conjugate gradient acceleration with the three-term direction recurrence.

    Starts from x_0 = 0, r_0 = p_0 = rhs and updates

        alpha_j = <r_j, p_j> / <p_j, W p_j>
        x_{j+1} = x_j + alpha_j p_j
        r_{j+1} = r_j - alpha_j W p_j
        p_{j+1} = W p_j - (<W p_j, W p_j> / <p_j, W p_j>) p_j
                        - (<W p_j, W p_{j-1}> / <p_{j-1}, W p_{j-1}>) p_{j-1}

    until ||r_j|| / ||rhs|| <= tol. Inner products are those of the span the
    map acts on. ``callback`` receives a copy of every iterate.
    If the iteration does not converge, the iterate with the smallest
    residual is returned.
    """
    _check_controls(tol, max_iter)
    system = _KrylovSystem(linear_map, rhs)
    b = system.b
    b_norm = system.norm(b)
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return _report(rhs, linear_map.frame_id, x, 0, 0.0, CONVERGED, [0.0])

    r = b.copy()
    p = b.copy()
    p_prev: Optional[np.ndarray] = None
    wp_prev: Optional[np.ndarray] = None
    curvature_prev = 0.0

    best_x, best_residual = x.copy(), 1.0
    history: List[float] = []
    status = MAX_ITER
    iterations = 0

    for iteration in range(1, max_iter + 1):
        wp = system.apply(p)
        curvature = system.inner(wp, p).real
        if curvature <= BREAKDOWN:
            status = STAGNATION
            logger.debug("CG breakdown at iteration %d (<p, Wp> = %.3e)", iteration, curvature)
            break

        alpha = system.inner(r, p) / curvature
        x = x + alpha * p
        r = r - alpha * wp
        iterations = iteration
        residual = system.norm(r) / b_norm
        history.append(residual)
        logger.debug("CG iteration %d relative residual %.3e", iteration, residual)
        if callback is not None:
            callback(x.copy())
        if residual < best_residual:
            best_x, best_residual = x.copy(), residual
        if residual <= tol:
            status = CONVERGED
            break

        p_next = wp - (system.inner(wp, wp) / curvature) * p
        if p_prev is not None:
            p_next = p_next - (system.inner(wp, wp_prev) / curvature_prev) * p_prev
        p_prev, wp_prev, curvature_prev = p, wp, curvature
        p = p_next

    if status != CONVERGED:
        logger.warning(
            "CG on %s (dimension %d) stopped with status %s after %d iterations, residual %.3e",
            linear_map.label,
            linear_map.dimension,
            status,
            iterations,
            best_residual,
        )
    solution = x if status == CONVERGED else best_x
    final = history[-1] if status == CONVERGED else best_residual
    return _report(rhs, linear_map.frame_id, solution, iterations, final, status, history)


def richardson_solve(
    linear_map: LinearMap,
    rhs: CoefVector,
    bounds: FrameBounds,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    halve_lower: bool = True,
    callback: Optional[IterateCallback] = None,
) -> SolveReport:
    """Frame-bound relaxation x_j = x_{j-1} + 2 / (A/2 + B) (rhs - W x_{j-1}).

    With ``halve_lower=False`` the relaxation is 2 / (A + B), for maps whose
    lower bound is A itself.
    """
    _check_controls(tol, max_iter)
    lower = 0.5 * bounds.A if halve_lower else bounds.A
    relaxation = 2.0 / (lower + bounds.B)

    system = _KrylovSystem(linear_map, rhs)
    b = system.b
    b_norm = system.norm(b)
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return _report(rhs, linear_map.frame_id, x, 0, 0.0, CONVERGED, [0.0])

    r = b.copy()
    previous = 1.0
    growth = 0
    best_x, best_residual = x.copy(), 1.0
    history: List[float] = []
    status = MAX_ITER
    iterations = 0

    for iteration in range(1, max_iter + 1):
        x = x + relaxation * r
        r = b - system.apply(x)
        iterations = iteration
        residual = system.norm(r) / b_norm
        history.append(residual)
        if callback is not None:
            callback(x.copy())
        if residual < best_residual:
            best_x, best_residual = x.copy(), residual
        if residual <= tol:
            status = CONVERGED
            break
        growth = growth + 1 if residual > previous else 0
        if growth >= DIVERGENCE_STEPS:
            status = DIVERGED
            break
        previous = residual

    if status != CONVERGED:
        logger.warning(
            "Richardson on %s stopped with status %s after %d iterations (relaxation %.4g)",
            linear_map.label,
            status,
            iterations,
            relaxation,
        )
    solution = x if status == CONVERGED else best_x
    final = history[-1] if status == CONVERGED else best_residual
    return _report(rhs, linear_map.frame_id, solution, iterations, final, status, history)


def direct_ls(omega: CrossGram, f_hat: CoefVector) -> CoefVector:
    """Least-squares coefficients minimizing sum_j |<g, row_j> - f_hat_j|^2 over the column span."""
    if not f_hat.index_set.contains(omega.rows):
        raise ValueError(
            f"Sampling data (half-width {f_hat.index_set.half_width}) does not cover "
            f"cross-Gram rows (half-width {omega.rows.half_width})"
        )
    data = f_hat.restrict(omega.rows).values
    solution, _, rank, _ = spla.lstsq(omega.analysis_matrix(), data, lapack_driver="gelsy")
    columns = omega.cols.size
    if rank < columns:
        raise SingularSystemError(
            f"Least-squares system is rank deficient: numerical rank {rank} of {columns}"
        )
    return CoefVector(omega.cols, _readonly(np.asarray(solution, dtype=np.complex128)), omega.col_frame_id)


def estimate_frame_bounds(
    frame: FrameFamily,
    probe_half_width: int,
    max_n: Optional[int] = None,
) -> FrameBounds:
    """Extreme Rayleigh quotients of the frame operator on integer exponentials |l| <= probe.

    The frame is sampled over its own extent, widened to at least twice the
    probe, so a fixed frame gives bounds that are nested in the probe width.
    """
    if probe_half_width < MIN_PROBE:
        raise ValueError(f"Probe half-width must be >= {MIN_PROBE}, got {probe_half_width}")
    if max_n is not None and probe_half_width < PROBE_FACTOR * max_n:
        raise ValueError(
            f"Probe half-width {probe_half_width} is below {PROBE_FACTOR} x max n = {PROBE_FACTOR * max_n}"
        )

    sampling = frame.extend(max(frame.half_width, 2 * probe_half_width))
    basis = make_frame(INTEGER, probe_half_width)
    analysis = gram(sampling, basis).analysis_matrix()
    eigenvalues = spla.eigvalsh(analysis.conj().T @ analysis)
    lower, upper = float(eigenvalues[0]), float(eigenvalues[-1])
    if lower <= 0.0:
        raise SingularSystemError(
            f"{frame.frame_id} has no positive lower bound at probe {probe_half_width} (lambda_min={lower:.3e})"
        )
    logger.info("Frame bounds of %s at probe %d: A=%.4f B=%.4f", frame.frame_id, probe_half_width, lower, upper)
    return FrameBounds(lower, max(upper, lower), EIGEN_NUMERIC)


def condition_number(linear_map: LinearMap) -> float:
    """2-norm condition number of the moment matrix; inf when it is singular."""
    singular_values = spla.svdvals(linear_map.matrix)
    smallest = float(singular_values[-1])
    if smallest <= 0.0:
        return math.inf
    return float(singular_values[0]) / smallest
