"""
Frame families of complex exponentials on [-1, 1] and their Gram matrices.

Inner products use the normalized convention

    <f, g> = 1/2 * integral_{-1}^{1} f(x) conj(g(x)) dx,

under which the integer exponentials e^{-i pi j x} are orthonormal and the
inner product of two exponentials is sinc(lambda - mu).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as spla

logger = logging.getLogger(__name__)

JITTERED = "jittered-fourier"
INTEGER = "integer-fourier"
FRAME_KINDS = (JITTERED, INTEGER)

KADEC_BOUND = 0.25
RNG_NAME = "numpy.PCG64"
SINGULAR_RATIO = 1e-10
_SYNTHESIS_CHUNK = 2048


class SingularSystemError(RuntimeError):
    """Raised when a Gram or moment system cannot be solved reliably."""


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class IndexSet:
    """Symmetric index set {-k, ..., k} stored at positions 0 .. 2k."""

    half_width: int

    def __post_init__(self) -> None:
        if isinstance(self.half_width, bool) or int(self.half_width) != self.half_width:
            raise ValueError(f"half_width must be an integer, got {self.half_width!r}")
        if self.half_width < 0:
            raise ValueError(f"half_width must be nonnegative, got {self.half_width}")
        object.__setattr__(self, "half_width", int(self.half_width))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def contains(self, other: IndexSet) -> bool:
        return other.half_width <= self.half_width

    def slice_of(self, inner: IndexSet) -> slice:
        """Storage positions of ``inner`` inside this set."""
        if not self.contains(inner):
            raise ValueError(
                f"Index set of half-width {inner.half_width} exceeds half-width {self.half_width}"
            )
        start = self.half_width - inner.half_width
        return slice(start, start + inner.size)


def _center_out(half_width: int) -> np.ndarray:
    """Indices ordered 0, 1, -1, 2, -2, ... so draws are prefix-stable in k."""
    order = np.zeros(2 * half_width + 1, dtype=np.int64)
    order[1::2] = np.arange(1, half_width + 1)
    order[2::2] = -np.arange(1, half_width + 1)
    return order


@dataclass(frozen=True, eq=False)
class FrameFamily:
    """Exponentials e^{-i pi lambda_j x} identified by their frequency sequence."""

    kind: str
    index_set: IndexSet
    frequencies: np.ndarray = field(repr=False)
    jitter_bound: float = 0.0
    seed: Optional[int] = None

    @property
    def half_width(self) -> int:
        return self.index_set.half_width

    @property
    def frame_id(self) -> str:
        if self.kind == INTEGER:
            return INTEGER
        return f"{JITTERED}(delta={self.jitter_bound:g},seed={self.seed})"

    def frequencies_for(self, idx: IndexSet) -> np.ndarray:
        return self.frequencies[self.index_set.slice_of(idx)]

    def extend(self, half_width: int) -> FrameFamily:
        """Same family on a wider index set; shared indices keep their frequencies."""
        if half_width <= self.half_width:
            return self
        return make_frame(self.kind, half_width, self.jitter_bound, self.seed or 0)


def make_frame(
    kind: str,
    half_width: int,
    delta: float = KADEC_BOUND,
    seed: int = 0,
) -> FrameFamily:
    """Build a jittered Fourier frame (lambda_j = j + xi_j) or the integer basis.

    Jitter values xi_j are i.i.d. uniform on [-delta, delta], drawn from a
    PCG64 generator seeded with ``seed`` in the order j = 0, 1, -1, 2, -2, ...
    so a wider frame extends a narrower one with the same seed.
    """
    if kind not in FRAME_KINDS:
        raise ValueError(f"Unknown frame kind {kind!r}; expected one of {', '.join(FRAME_KINDS)}")
    index_set = IndexSet(half_width)
    indices = index_set.indices().astype(float)

    if kind == INTEGER:
        return FrameFamily(INTEGER, index_set, _readonly(indices))

    if not 0.0 <= delta <= KADEC_BOUND:
        raise ValueError(
            f"Jitter bound {delta!r} outside [0, {KADEC_BOUND}] (Kadec 1/4 bound)"
        )
    if seed < 0:
        raise ValueError(f"Seed must be a nonnegative 64-bit integer, got {seed}")

    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.uniform(-delta, delta, size=index_set.size)
    jitter = np.empty(index_set.size)
    jitter[_center_out(half_width) + half_width] = draws
    return FrameFamily(
        JITTERED,
        index_set,
        _readonly(indices + jitter),
        jitter_bound=float(delta),
        seed=int(seed),
    )


def exp_inner_product(lam: float, mu: float) -> complex:
    """Normalized inner product of e^{-i pi lam x} and e^{-i pi mu x}."""
    return complex(np.sinc(lam - mu))


def inner_product_matrix(row_frequencies: np.ndarray, col_frequencies: np.ndarray) -> np.ndarray:
    return np.sinc(np.subtract.outer(row_frequencies, col_frequencies)).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class CrossGram:
    """entries[j, l] = <row element j, column element l>."""

    rows: IndexSet
    cols: IndexSet
    entries: np.ndarray = field(repr=False)
    row_frame_id: str
    col_frame_id: str

    def __post_init__(self) -> None:
        if self.entries.shape != (self.rows.size, self.cols.size):
            raise ValueError(
                f"Gram entries of shape {self.entries.shape} do not match "
                f"index sets ({self.rows.size}, {self.cols.size})"
            )

    @property
    def shape(self):
        return self.entries.shape

    @property
    def is_self(self) -> bool:
        return self.row_frame_id == self.col_frame_id and self.rows == self.cols

    def analysis_matrix(self) -> np.ndarray:
        """Matrix taking column-frame coefficients a to <sum_l a_l col_l, row_j>."""
        return self.entries.conj()

    def block(self, rows: Optional[IndexSet] = None, cols: Optional[IndexSet] = None) -> CrossGram:
        rows = rows or self.rows
        cols = cols or self.cols
        entries = self.entries[self.rows.slice_of(rows), self.cols.slice_of(cols)].copy()
        return CrossGram(rows, cols, _readonly(entries), self.row_frame_id, self.col_frame_id)


def gram(
    row_frame: FrameFamily,
    col_frame: FrameFamily,
    rows: Optional[IndexSet] = None,
    cols: Optional[IndexSet] = None,
) -> CrossGram:
    """Assemble the (cross-)Gram matrix between two frame families."""
    rows = rows or row_frame.index_set
    cols = cols or col_frame.index_set
    entries = inner_product_matrix(
        row_frame.frequencies_for(rows), col_frame.frequencies_for(cols)
    )
    if row_frame.frame_id == col_frame.frame_id and rows == cols:
        entries = 0.5 * (entries + entries.conj().T)
    return CrossGram(rows, cols, _readonly(entries), row_frame.frame_id, col_frame.frame_id)


def principal_support(matrix: np.ndarray, ratio: float = SINGULAR_RATIO) -> np.ndarray:
    """Positions of the largest well-conditioned principal submatrix of a Hermitian PSD matrix."""
    eigenvalues = spla.eigvalsh(matrix)
    top = eigenvalues[-1]
    if top <= 0.0:
        raise SingularSystemError("Gram matrix has no positive eigenvalue")
    size = matrix.shape[0]
    if eigenvalues[0] > ratio * top:
        return np.arange(size)

    _, r, pivots = spla.qr(matrix, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = max(int(np.count_nonzero(diag > ratio * diag[0])), 1)
    support = np.sort(pivots[:rank])
    while rank > 1:
        sub = spla.eigvalsh(matrix[np.ix_(support, support)])
        if sub[0] > ratio * sub[-1]:
            break
        rank -= 1
        support = np.sort(pivots[:rank])
    logger.warning(
        "Gram matrix singular (lambda_min/lambda_max = %.3e); using principal submatrix of size %d/%d",
        eigenvalues[0] / top,
        support.size,
        size,
    )
    return support


def smallest_eigenvalue(matrix: np.ndarray) -> float:
    support = principal_support(matrix)
    return float(spla.eigvalsh(matrix[np.ix_(support, support)])[0])


def gram_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a Hermitian Gram system, restricted to a well-conditioned principal block if needed."""
    support = principal_support(matrix)
    solution = np.zeros(matrix.shape[0], dtype=np.complex128)
    solution[support] = spla.solve(
        matrix[np.ix_(support, support)], rhs[support], assume_a="her"
    )
    return solution


def synthesize(coefficients: np.ndarray, frequencies: np.ndarray, x) -> np.ndarray:
    """Evaluate sum_j c_j e^{-i pi lambda_j x} at the points ``x``."""
    points = np.asarray(x, dtype=float)
    flat = points.ravel()
    values = np.empty(flat.size, dtype=np.complex128)
    for start in range(0, flat.size, _SYNTHESIS_CHUNK):
        block = flat[start:start + _SYNTHESIS_CHUNK]
        values[start:start + block.size] = (
            np.exp(-1j * math.pi * np.outer(block, frequencies)) @ coefficients
        )
    return values.reshape(points.shape)
