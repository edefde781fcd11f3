"""
Coefficient-space realizations of the compressed frame operators.

W_n = Q_n S_m restricted to span{phi_l : |l| <= n} and V_n = P_n S_m
restricted to span{psi_l : |l| <= n} are represented by their Hermitian
moment matrices together with the Gram matrix of the expansion family.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as spla

from .frames import (
    CrossGram,
    IndexSet,
    SingularSystemError,
    _readonly,
    gram_solve,
    principal_support,
)
from .sampling import CoefVector

logger = logging.getLogger(__name__)

MAP_LABELS = ("W", "V", "finite-section")
FINITE_SECTION_MAX_COND = 1e12
_IDENTITY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Compressed frame operator on the span of a finite family.

    ``matrix`` is the Hermitian moment matrix (what the iterative solvers see);
    ``gram`` is the Gram matrix of the expansion family, or None when that
    family is orthonormal. ``metric`` is the inner product the Krylov solvers
    use, again None for the Euclidean one.
    """

    label: str
    index_set: IndexSet
    frame_id: str
    matrix: np.ndarray = field(repr=False)
    gram: Optional[np.ndarray] = field(default=None, repr=False)
    metric: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.label not in MAP_LABELS:
            raise ValueError(f"Unknown map label {self.label!r}; expected one of {', '.join(MAP_LABELS)}")
        if self.matrix.shape != (self.index_set.size, self.index_set.size):
            raise ValueError(
                f"Moment matrix of shape {self.matrix.shape} does not match index set size {self.index_set.size}"
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def operator_apply(self, x: np.ndarray) -> np.ndarray:
        """Coefficients of the compressed operator applied to the expansion with coefficients x."""
        moments = self.matrix @ x
        if self.gram is None:
            return moments
        return gram_solve(self.gram, moments)


def _hermitian(matrix: np.ndarray) -> np.ndarray:
    return _readonly(0.5 * (matrix + matrix.conj().T))


def _normal_matrix(cross: CrossGram) -> np.ndarray:
    analysis = cross.analysis_matrix()
    return _hermitian(analysis.conj().T @ analysis)


def _check_square(g: CrossGram, what: str) -> None:
    if not g.is_self:
        raise ValueError(f"{what} must be a self-Gram, got {g.row_frame_id} x {g.col_frame_id}")


def _expansion_gram(g: CrossGram) -> Optional[np.ndarray]:
    entries = g.entries
    if np.allclose(entries, np.eye(entries.shape[0]), rtol=0.0, atol=_IDENTITY_ATOL):
        return None
    principal_support(entries)
    return entries


def assemble_W(omega: CrossGram, phi_self: CrossGram) -> LinearMap:
    """W_n from the sampling-vs-admissible cross-Gram (rows psi_j, columns phi_l)."""
    _check_square(phi_self, "Admissible Gram")
    if omega.cols != phi_self.rows or omega.col_frame_id != phi_self.row_frame_id:
        raise ValueError(
            f"Cross-Gram columns ({omega.col_frame_id}, size {omega.cols.size}) do not match "
            f"the admissible Gram ({phi_self.row_frame_id}, size {phi_self.rows.size})"
        )
    phi = _expansion_gram(phi_self)
    return LinearMap(
        label="W",
        index_set=omega.cols,
        frame_id=omega.col_frame_id,
        matrix=_normal_matrix(omega),
        gram=phi,
        metric=phi,
    )


def assemble_V(psi_rect: CrossGram, psi_self: CrossGram) -> LinearMap:
    """V_n from the block <psi_j, psi_l>, |j| <= m, |l| <= n, and the Gram Psi_n."""
    _check_square(psi_self, "Sampling Gram")
    if psi_rect.row_frame_id != psi_rect.col_frame_id:
        raise ValueError("V_n needs the sampling frame against itself")
    if psi_rect.cols != psi_self.rows or psi_rect.col_frame_id != psi_self.row_frame_id:
        raise ValueError(
            f"Sampling block columns (size {psi_rect.cols.size}) do not match "
            f"Psi_n (size {psi_self.rows.size})"
        )
    return LinearMap(
        label="V",
        index_set=psi_rect.cols,
        frame_id=psi_rect.col_frame_id,
        matrix=_normal_matrix(psi_rect),
        gram=_expansion_gram(psi_self),
        metric=None,
    )


def section_map(psi_to_phi: CrossGram, m: int) -> LinearMap:
    """Truncated moment matrix <S_m phi_i, phi_j> of the finite section method."""
    if psi_to_phi.rows.half_width < m:
        raise ValueError(
            f"Cross-Gram rows (half-width {psi_to_phi.rows.half_width}) do not cover m={m}"
        )
    block = psi_to_phi.block(rows=IndexSet(m))
    return LinearMap(
        label="finite-section",
        index_set=block.cols,
        frame_id=block.col_frame_id,
        matrix=_normal_matrix(block),
    )


def moment_rhs(cross: CrossGram, f_hat: CoefVector) -> CoefVector:
    """Moments <S_m f, col_k> = sum_j <f, row_j><row_j, col_k> from the sampling data."""
    if not f_hat.index_set.contains(cross.rows):
        raise ValueError(
            f"Sampling data (half-width {f_hat.index_set.half_width}) does not cover "
            f"cross-Gram rows (half-width {cross.rows.half_width})"
        )
    data = f_hat.restrict(cross.rows).values
    values = cross.analysis_matrix().conj().T @ data
    return CoefVector(cross.cols, _readonly(values), cross.col_frame_id)


def project(gram_self: CrossGram, moments: CoefVector) -> CoefVector:
    """Expansion coefficients a with Gram a = moments (P_n, Q_n or U_n^{-1})."""
    _check_square(gram_self, "Projection Gram")
    if moments.index_set != gram_self.cols:
        raise ValueError(
            f"Moments of size {moments.index_set.size} do not match Gram of size {gram_self.cols.size}"
        )
    values = gram_solve(gram_self.entries, moments.values)
    return CoefVector(gram_self.cols, _readonly(values), gram_self.col_frame_id)


def finite_section(psi_to_phi: CrossGram, f_hat_basis: CoefVector, m: int) -> CoefVector:
    """Solve sum_i g_i <S_m phi_i, phi_j> = <f, phi_j> for the basis coefficients of S^{-1} f."""
    section = section_map(psi_to_phi, m)
    if f_hat_basis.index_set != section.index_set:
        raise ValueError(
            f"Basis coefficients of size {f_hat_basis.index_set.size} do not match "
            f"section of size {section.dimension}"
        )
    condition = float(np.linalg.cond(section.matrix))
    if not np.isfinite(condition) or condition > FINITE_SECTION_MAX_COND:
        raise SingularSystemError(
            f"Finite-section system with m={m} is singular (condition number {condition:.3e})"
        )
    values = spla.solve(section.matrix, f_hat_basis.values, assume_a="her")
    logger.debug("Finite section n=%d m=%d solved, condition %.3g", section.index_set.half_width, m, condition)
    return CoefVector(section.index_set, _readonly(values), section.frame_id)
