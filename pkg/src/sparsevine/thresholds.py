"""Turn a regularization-path matrix into independence patterns.

Each strictly-lower-triangular entry of the path matrix carries the penalty
level at which the corresponding vine edge's variable entered its lasso
regression. Thresholding those levels yields a boolean pattern: True cells
keep their pair copula, False cells are forced to independence. Two rules
are provided: a fixed cut-off, and an adaptive rule that keeps a requested
share of the edges.

Both rules are pure functions of the matrix: sweeping many thresholds never
recomputes any regression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .rvine import IndependencePattern


@dataclass(frozen=True)
class ThresholdSpec:
    """A thresholding rule: ``("single", lambda_t)`` or ``("adaptive", mu)``."""

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("single", "adaptive"):
            raise ContractError(f"mode must be 'single' or 'adaptive', got {self.mode!r}")
        if self.mode == "single" and not self.value > 0.0:
            raise ContractError(f"single threshold needs lambda_t > 0, got {self.value}")
        if self.mode == "adaptive" and not 0.0 < self.value <= 1.0:
            raise ContractError(f"adaptive threshold needs mu in (0, 1], got {self.value}")


def _lower_cells(lam: np.ndarray):
    d = lam.shape[0]
    if lam.ndim != 2 or lam.shape[1] != d:
        raise ContractError("lambda matrix must be square")
    rows, cols = np.tril_indices(d, k=-1)
    return d, rows, cols


def single_threshold(lambda_matrix: np.ndarray, lambda_t: float) -> IndependencePattern:
    """Keep every edge whose entry penalty is at least ``lambda_t``.

    Infinite entries (cells that were never assigned a regression) always
    survive; zero entries never do, since ``lambda_t`` must be positive.
    """
    if not lambda_t > 0.0:
        raise ContractError(f"lambda_t must be positive, got {lambda_t}")
    lam = np.asarray(lambda_matrix, dtype=float)
    d, rows, cols = _lower_cells(lam)
    keep = np.zeros((d, d), dtype=bool)
    keep[rows, cols] = lam[rows, cols] >= lambda_t
    return IndependencePattern(keep)


def adaptive_threshold(lambda_matrix: np.ndarray, mu: float):
    """Keep the ``floor(mu * d(d-1)/2)`` largest positive entries.

    Returns ``(pattern, lambda_mu)`` where ``lambda_mu`` is the smallest
    penalty level actually kept. Ties at the cut are all kept (the realized
    count may then exceed the nominal one); zero entries are never kept.
    With a nominal count of zero the pattern is all-false and ``lambda_mu``
    is ``inf``.
    """
    if not 0.0 < mu <= 1.0:
        raise ContractError(f"mu must lie in (0, 1], got {mu}")
    lam = np.asarray(lambda_matrix, dtype=float)
    d, rows, cols = _lower_cells(lam)
    values = lam[rows, cols]
    if np.any(np.isnan(values)):
        raise ContractError("lambda matrix has unfilled lower-triangular cells")
    k = math.floor(mu * d * (d - 1) / 2.0)
    keep = np.zeros((d, d), dtype=bool)
    positive = np.sort(values[values > 0.0])[::-1]
    if k == 0 or positive.size == 0:
        return IndependencePattern(keep), math.inf
    cut = positive[min(k, positive.size) - 1]
    keep[rows, cols] = lam[rows, cols] >= cut
    return IndependencePattern(keep), float(cut)


def default_threshold_grid() -> tuple:
    """The fourth-power grid 0.05^4, 0.10^4, ..., 0.50^4 used for sweeps."""
    return tuple((j / 20.0) ** 4 for j in range(1, 11))


def path_threshold_grid(lambda_matrix: np.ndarray) -> tuple:
    """Every distinct positive finite entry penalty, ascending.

    Using each value as a single threshold enumerates all patterns the
    matrix can produce, from keep-everything-positive down to the single
    strongest edge. Adaptive thresholds select from the same family, so a
    sweep over this grid dominates both rules.
    """
    lam = np.asarray(lambda_matrix, dtype=float)
    _, rows, cols = _lower_cells(lam)
    values = lam[rows, cols]
    finite = np.unique(values[np.isfinite(values) & (values > 0.0)])
    return tuple(float(v) for v in finite)


def apply_threshold(lambda_matrix: np.ndarray, spec: ThresholdSpec):
    """Dispatch on the spec; returns ``(pattern, realized_cutoff)``."""
    if spec.mode == "single":
        return single_threshold(lambda_matrix, spec.value), spec.value
    return adaptive_threshold(lambda_matrix, spec.value)
