"""
Localization diagnostics, theoretical constants and m-selection rules.

Constants quoted from the convergence analysis (c0, c1 = 8/pi) refer to the
unnormalized integral over [-1, 1]; under the normalized inner product used
throughout the package the same Fourier-frame bound reads 4/pi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .frames import (
    INTEGER,
    CrossGram,
    FrameFamily,
    IndexSet,
    gram,
    make_frame,
    smallest_eigenvalue,
)
from .sampling import CoefVector

logger = logging.getLogger(__name__)

C1_UNNORMALIZED = 8.0 / math.pi
C1_NORMALIZED = 4.0 / math.pi
SATURATION_LEVEL = 1e-13
FIT_START = 4
MIN_OFFSETS = 8
TAIL_FACTOR = 10
M_RULES = ("cc", "inverse", "reconstruction", "fourier")
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class LocalizationFit:
    """Fit of an off-diagonal decay profile d_k ~ c (1 + k)^(-s)."""

    c: float
    s: float
    residual: float
    saturated: bool
    points: int = 0


@dataclass(frozen=True)
class TheoryConstants:
    A_mn: float
    B_mn_bound: float
    B_mn_exact: float
    lambda_min: float
    lambda_min_psi: float
    tail_remainder: float
    j_max: int


def _fit_power_law(offsets: np.ndarray, profile: np.ndarray) -> Tuple[float, float, float, int]:
    usable = profile > 0.0
    offsets = offsets[usable]
    profile = profile[usable]
    if offsets.size < 2:
        raise ValueError("Not enough nonzero decay samples to fit a power law")
    log_k = np.log1p(offsets)
    log_d = np.log(profile)
    slope, intercept = np.polyfit(log_k, log_d, 1)
    residual = float(np.sqrt(np.mean((log_d - (slope * log_k + intercept)) ** 2)))
    return math.exp(intercept), -float(slope), residual, int(offsets.size)


def _saturated_fit(profile: np.ndarray) -> LocalizationFit:
    c = max(float(profile.max(initial=0.0)), np.finfo(float).tiny)
    return LocalizationFit(c=c, s=math.inf, residual=0.0, saturated=True)


def estimate_localization(g: CrossGram) -> LocalizationFit:
    """Fit the decay of max_{|j-l|=k} |g[j, l]| in the index offset k."""
    offsets = np.abs(np.subtract.outer(g.rows.indices(), g.cols.indices()))
    k_max = int(offsets.max())
    if k_max < MIN_OFFSETS:
        raise ValueError(
            f"Gram matrix too small for a localization fit: {k_max} off-diagonal offsets, "
            f"need at least {MIN_OFFSETS}"
        )

    profile = np.zeros(k_max + 1)
    np.maximum.at(profile, offsets.ravel(), np.abs(g.entries).ravel())
    decay = profile[1:]
    if np.all(decay < SATURATION_LEVEL):
        return _saturated_fit(decay)

    k = np.arange(1, k_max + 1)
    window = (k >= FIT_START) & (k <= max(k_max // 2, FIT_START + 1))
    c, s, residual, points = _fit_power_law(k[window], decay[window])
    logger.debug("Localization fit %s x %s: c=%.4g s=%.4g", g.row_frame_id, g.col_frame_id, c, s)
    return LocalizationFit(c=c, s=s, residual=residual, saturated=False, points=points)


def coefficient_decay(coef: CoefVector) -> LocalizationFit:
    """Fit |<f, psi_j>| ~ c (1 + |j|)^(-s); a diagnostic, never enforced."""
    k_max = coef.index_set.half_width
    if k_max < MIN_OFFSETS:
        raise ValueError(f"Need half-width >= {MIN_OFFSETS} for a decay fit, got {k_max}")
    magnitudes = np.abs(coef.values)
    center = coef.index_set.half_width
    k = np.arange(1, k_max + 1)
    profile = np.maximum(magnitudes[center + k], magnitudes[center - k])
    if np.all(profile < SATURATION_LEVEL):
        return _saturated_fit(profile)
    window = k >= FIT_START
    c, s, residual, points = _fit_power_law(k[window], profile[window])
    return LocalizationFit(c=c, s=s, residual=residual, saturated=False, points=points)


def theory_constants(
    psi_self: CrossGram,
    phi_self: CrossGram,
    cross: CrossGram,
    c0: float,
    c1: float,
    s: float,
    m: int,
    n: int,
) -> TheoryConstants:
    """A_{m,n}, the B_{m,n} bound, and B_{m,n} summed over sampling rows m < |j| <= J_max.

    ``cross`` holds <psi_j, phi_l> for |j| <= J_max and |l| <= n.
    """
    if s <= 0.5:
        raise ValueError(f"Decay exponent s must exceed 1/2, got {s}")
    if m <= n:
        raise ValueError(f"Need m > n, got m={m}, n={n}")
    j_max = cross.rows.half_width
    if j_max <= m:
        raise ValueError(f"Cross-Gram rows (half-width {j_max}) must extend beyond m={m}")

    lambda_psi = smallest_eigenvalue(psi_self.entries)
    lambda_phi = smallest_eigenvalue(phi_self.entries)
    exponent = 2.0 * s - 1.0
    scale = n * (m - n) ** (-exponent) / exponent

    a_mn = c0 ** 2 * scale / lambda_psi
    b_bound = c1 ** 2 * scale / lambda_phi

    block = cross.block(cols=IndexSet(n)).entries
    tail_rows = np.abs(cross.rows.indices()) > m
    b_exact = float(np.sum(np.abs(block[tail_rows]) ** 2)) / lambda_phi
    remainder = c1 ** 2 * n * (j_max - n) ** (-exponent) / exponent / lambda_phi

    return TheoryConstants(
        A_mn=float(a_mn),
        B_mn_bound=float(b_bound),
        B_mn_exact=b_exact,
        lambda_min=lambda_phi,
        lambda_min_psi=lambda_psi,
        tail_remainder=float(remainder),
        j_max=j_max,
    )


def bound_certificate(
    frame: FrameFamily,
    n: int,
    m: int,
    c0: float = C1_UNNORMALIZED,
    c1: float = C1_UNNORMALIZED,
    s: float = 1.0,
) -> TheoryConstants:
    """theory_constants for a sampling frame against the integer basis, J_max = 10 m."""
    j_max = TAIL_FACTOR * m
    sampling = frame.extend(j_max)
    basis = make_frame(INTEGER, n)
    cross = gram(sampling, basis, IndexSet(j_max), IndexSet(n))
    psi_self = gram(sampling, sampling, IndexSet(n), IndexSet(n))
    phi_self = gram(basis, basis)
    return theory_constants(psi_self, phi_self, cross, c0, c1, s, m, n)


def choose_m(
    rule: str,
    n: int,
    A: float,
    c: float = C1_UNNORMALIZED,
    s: float = 1.0,
    lambda_min: float = 1.0,
    alpha: float = 1.0,
    t: float = 1.0,
) -> int:
    """Sampling half-width m for reconstruction half-width n, rounded up."""
    if rule not in M_RULES:
        raise ValueError(f"Unknown m rule {rule!r}; expected one of {', '.join(M_RULES)}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if A <= 0:
        raise ValueError(f"Lower frame bound A must be positive, got {A}")

    if rule == "fourier":
        value = (A * math.pi ** 2 + 128.0) / (A * math.pi ** 2) * n
        return int(math.ceil(value - _CEIL_SLACK))

    if s <= 0.5:
        raise ValueError(f"Decay exponent s must exceed 1/2, got {s}")
    if lambda_min <= 0:
        raise ValueError(f"lambda_min must be positive, got {lambda_min}")
    power = 1.0 / (2.0 * s - 1.0)
    denominator = A * (2.0 * s - 1.0) * lambda_min

    if rule == "cc":
        value = n + (2.0 * n / denominator) ** power
    elif rule == "inverse":
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        value = n + alpha * (2.0 * c ** 2 / denominator) ** power * n ** ((t + 0.5) * power)
    else:
        value = n + (2.0 * c ** 2 * n / denominator) ** power
    return int(math.ceil(value - _CEIL_SLACK))
