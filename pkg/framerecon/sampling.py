"""
Frame-coefficient acquisition on [-1, 1].

Coefficients <f, psi_j> are computed with a composite Gauss-Legendre rule;
there are no closed forms for the sampled data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .frames import FrameFamily, IndexSet, _readonly, synthesize

logger = logging.getLogger(__name__)

DEFAULT_PANELS = 32
DEFAULT_ORDER = 24
_ROW_CHUNK = 64


class QuadratureError(ValueError):
    """Raised when a quadrature rule cannot resolve the requested frequencies."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    panels: int
    order: int

    @property
    def size(self) -> int:
        return self.panels * self.order

    def integrate(self, values: np.ndarray):
        return np.dot(self.weights, values)


@lru_cache(maxsize=32)
def build_quadrature(panels: int, order: int) -> QuadratureRule:
    """Composite Gauss-Legendre rule with ``panels`` equal subintervals of [-1, 1]."""
    if panels < 1:
        raise QuadratureError(f"panels must be >= 1, got {panels}")
    if order < 2:
        raise QuadratureError(f"order must be >= 2, got {order}")

    reference_nodes, reference_weights = np.polynomial.legendre.leggauss(order)
    width = 2.0 / panels
    left = -1.0 + width * np.arange(panels)
    nodes = (left[:, None] + 0.5 * width * (reference_nodes[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * width * reference_weights, panels)
    return QuadratureRule(_readonly(nodes), _readonly(weights), panels, order)


def default_quadrature(half_width: int) -> QuadratureRule:
    return build_quadrature(max(DEFAULT_PANELS, int(half_width)), DEFAULT_ORDER)


def required_nodes(half_width: int) -> int:
    return 4 * (half_width + 1)


@dataclass(frozen=True)
class TargetFunction:
    name: str
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    smoothness_note: str = ""

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))


def _gaussian(x):
    return np.exp(-x ** 2)


def _cospoly(x):
    return np.cos(np.pi * x) ** 3 * (np.sin(x) ** 2 + 1.0)


def _bump6(x):
    return (1.0 - x ** 2) ** 3


TEST_FUNCTIONS = {
    "gaussian": TargetFunction(
        "gaussian", _gaussian, "analytic; periodic extension continuous with a derivative jump"
    ),
    "cospoly": TargetFunction(
        "cospoly", _cospoly, "analytic; periodic extension continuous with a derivative jump"
    ),
    "bump6": TargetFunction(
        "bump6", _bump6, "polynomial; periodic extension is C^2 with a third-derivative jump"
    ),
}


def test_function(name: str) -> TargetFunction:
    try:
        return TEST_FUNCTIONS[name]
    except KeyError as exc:
        raise ValueError(
            f"Unknown test function {name!r}; expected one of {', '.join(TEST_FUNCTIONS)}"
        ) from exc


@dataclass(frozen=True, eq=False)
class CoefVector:
    index_set: IndexSet
    values: np.ndarray = field(repr=False)
    frame_id: str

    def __post_init__(self) -> None:
        if self.values.shape != (self.index_set.size,):
            raise ValueError(
                f"Coefficient vector of length {self.values.shape} does not match "
                f"index set size {self.index_set.size}"
            )

    def restrict(self, idx: IndexSet) -> CoefVector:
        return CoefVector(idx, _readonly(self.values[self.index_set.slice_of(idx)].copy()), self.frame_id)


def coef_vector(index_set: IndexSet, values, frame_id: str) -> CoefVector:
    return CoefVector(index_set, _readonly(np.array(values, dtype=np.complex128)), frame_id)


def expansion_target(coef: CoefVector, frame: FrameFamily, name: str = "expansion") -> TargetFunction:
    """Target function equal to a finite exponential sum over ``frame``."""
    frequencies = frame.frequencies_for(coef.index_set).copy()
    values = coef.values.copy()
    return TargetFunction(
        name,
        lambda x: synthesize(values, frequencies, x),
        f"finite sum of {coef.index_set.size} exponentials from {frame.frame_id}",
    )


def frame_coefficients(
    f: TargetFunction,
    frame: FrameFamily,
    idx: Optional[IndexSet] = None,
    q: Optional[QuadratureRule] = None,
) -> CoefVector:
    """Sampling data <f, psi_j> = 1/2 sum_k w_k f(x_k) e^{+i pi lambda_j x_k}."""
    idx = idx or frame.index_set
    q = q or default_quadrature(idx.half_width)
    needed = required_nodes(idx.half_width)
    if q.size < needed:
        raise QuadratureError(
            f"Quadrature with {q.size} nodes cannot resolve half-width {idx.half_width}; "
            f"at least {needed} nodes (panels * order) are required"
        )

    frequencies = frame.frequencies_for(idx)
    weighted = 0.5 * q.weights * np.asarray(f(q.nodes), dtype=np.complex128)
    if not np.all(np.isfinite(weighted)):
        raise ValueError(f"Target function {f.name!r} is not finite on the quadrature nodes")

    values = np.empty(idx.size, dtype=np.complex128)
    for start in range(0, idx.size, _ROW_CHUNK):
        block = frequencies[start:start + _ROW_CHUNK]
        values[start:start + block.size] = (
            np.exp(1j * math.pi * np.outer(block, q.nodes)) @ weighted
        )
    logger.debug(
        "Computed %d coefficients of %s against %s with %d nodes",
        idx.size,
        f.name,
        frame.frame_id,
        q.size,
    )
    return CoefVector(idx, _readonly(values), frame.frame_id)
