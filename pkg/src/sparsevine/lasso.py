"""Weighted-L1 penalized regression, regularization paths, cross-validation.

The solver minimizes

    (1/2n) * sum_i (y_i - sum_l phi_l x_il)^2  +  lam * sum_l w_l * |phi_l|

with no intercept. Per-coefficient weights ``w_l`` encode forced-in
coordinates (``w_l = 0``, "whitelisted") and excluded coordinates
(``w_l = inf``, "blacklisted"); ordinary coordinates use ``w_l = 1``.

A regularization path records, for every coefficient that took part in the
regression, the largest grid penalty at which it first became nonzero (its
"entry" value). Whitelisted coefficients are active everywhere and head the
path with an infinite entry value; coefficients that never activate trail
with an entry value of zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import cd_path_gram, cd_solve_gram
from .errors import ContractError, NumericError

DEFAULT_N_LAMBDAS = 100
DEFAULT_EPS = 1e-4
DEFAULT_TOL = 1e-7
DEFAULT_MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class LassoProblem:
    """A no-intercept squared-error problem with per-coefficient L1 weights.

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Regressor matrix (z-scale columns are used as-is; the solver never
        re-standardizes).
    y : ndarray, shape (n,)
        Response vector.
    penalty_weights : ndarray, shape (p,), optional
        Nonnegative weights; 0 whitelists, ``inf`` excludes. Defaults to
        all ones.
    """

    X: np.ndarray
    y: np.ndarray
    penalty_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ContractError(f"X must be n x p with p >= 1, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ContractError(
                f"y has length {y.shape}, X has {X.shape[0]} rows"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise NumericError("non-finite values in regression data")
        w = self.penalty_weights
        w = np.ones(X.shape[1]) if w is None else np.asarray(w, dtype=float)
        if w.shape != (X.shape[1],):
            raise ContractError(f"penalty_weights shape {w.shape} != ({X.shape[1]},)")
        if np.any(np.isnan(w)) or np.any(w < 0):
            raise ContractError("penalty weights must be nonnegative (inf allowed)")
        if not np.any(np.isfinite(w)):
            raise ContractError("every coefficient is excluded; nothing to solve")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "penalty_weights", w)
        n = X.shape[0]
        object.__setattr__(self, "_gram", X.T @ X / n)
        object.__setattr__(self, "_xty", X.T @ y / n)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def whitelist(self) -> np.ndarray:
        """Indices with zero penalty weight, in index order."""
        return np.flatnonzero(self.penalty_weights == 0.0)

    @property
    def penalized(self) -> np.ndarray:
        """Indices with finite positive penalty weight, in index order."""
        w = self.penalty_weights
        return np.flatnonzero(np.isfinite(w) & (w > 0.0))


@dataclass(frozen=True)
class RegularizationPath:
    """Entry order and entry penalties of one regression's coefficients.

    ``entries`` lists ``(coefficient index, entry lambda)`` pairs, most
    important first: whitelisted coefficients (entry ``inf``), then penalized
    coefficients in order of first activation (descending grid penalty),
    then never-activated coefficients (entry 0).
    """

    entries: tuple
    lambda_grid: np.ndarray
    coefs: np.ndarray  # (n_grid, p); empty when the grid is empty

    @property
    def order(self) -> tuple:
        return tuple(idx for idx, _ in self.entries)

    @property
    def entry_lambdas(self) -> dict:
        return {idx: lam for idx, lam in self.entries}

    def active_counts(self) -> np.ndarray:
        """Number of nonzero coefficients at each grid point."""
        if self.coefs.size == 0:
            return np.zeros(0, dtype=int)
        return np.count_nonzero(self.coefs, axis=1)


def solve(problem: LassoProblem, lam: float, *, tol: float = DEFAULT_TOL,
          max_sweeps: int = DEFAULT_MAX_SWEEPS,
          warm_start: np.ndarray = None) -> np.ndarray:
    """Return a minimizer of the weighted-L1 objective at penalty ``lam``."""
    if not np.isfinite(lam) or lam < 0:
        raise ContractError(f"penalty must be a finite nonnegative real, got {lam}")
    phi = np.zeros(problem.p) if warm_start is None else np.array(warm_start, dtype=float)
    resid = problem._xty - problem._gram @ phi
    cd_solve_gram(problem._gram, problem._xty, problem.penalty_weights,
                  float(lam), phi, resid, tol, max_sweeps)
    return phi


def _whitelist_residual_corr(problem: LassoProblem) -> np.ndarray:
    """|<x_l, r>| / (n w_l) for penalized l, with r the residual of the
    least-squares fit on the whitelisted columns (r = y when none)."""
    resid = problem.y
    wl = problem.whitelist
    if wl.size:
        beta, *_ = np.linalg.lstsq(problem.X[:, wl], problem.y, rcond=None)
        resid = problem.y - problem.X[:, wl] @ beta
    pen = problem.penalized
    corr = np.abs(problem.X[:, pen].T @ resid) / problem.n
    return corr / problem.penalty_weights[pen]


def lambda_grid(problem: LassoProblem, n_lambdas: int = DEFAULT_N_LAMBDAS,
                eps: float = DEFAULT_EPS) -> np.ndarray:
    """Descending log-spaced grid from the smallest all-zero penalty down
    to ``eps`` times it."""
    if problem.penalized.size == 0:
        return np.zeros(0)
    lam_max = float(np.max(_whitelist_residual_corr(problem)))
    if lam_max <= 0.0:
        # Nothing ever activates; a single zero point keeps shapes sane.
        return np.zeros(1)
    return np.geomspace(lam_max, eps * lam_max, n_lambdas)


def path(problem: LassoProblem, *, n_lambdas: int = DEFAULT_N_LAMBDAS,
         eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL,
         max_sweeps: int = DEFAULT_MAX_SWEEPS,
         grid: np.ndarray = None) -> RegularizationPath:
    """Compute the full regularization path of ``problem``.

    The grid runs from the smallest penalty with an empty penalized active
    set down to ``eps`` times it, warm-starting each solve at the previous
    solution. Ties (two coefficients first seen nonzero at the same grid
    point) rank the larger absolute coefficient first, then the lower index.
    """
    grid = lambda_grid(problem, n_lambdas, eps) if grid is None else np.asarray(grid, float)
    if grid.size:
        coefs = cd_path_gram(problem._gram, problem._xty, problem.penalty_weights,
                             grid, tol, max_sweeps)
    else:
        coefs = np.zeros((0, problem.p))

    entries = [(int(l), np.inf) for l in problem.whitelist]
    activated = []
    never = []
    for l in problem.penalized:
        nz = np.flatnonzero(coefs[:, l]) if coefs.size else np.zeros(0, int)
        if nz.size:
            g = int(nz[0])
            activated.append((g, -abs(coefs[g, l]), int(l), float(grid[g])))
        else:
            final = abs(coefs[-1, l]) if coefs.size else 0.0
            never.append((-final, int(l)))
    activated.sort()
    never.sort()
    entries.extend((l, lam) for _, _, l, lam in activated)
    entries.extend((l, 0.0) for _, l in never)
    return RegularizationPath(tuple(entries), grid, coefs)


@dataclass(frozen=True)
class CVResult:
    """Cross-validation summary over a shared penalty grid."""

    lambda_min: float
    lambda_1se: float
    lambda_grid: np.ndarray
    mean_mse: np.ndarray
    se_mse: np.ndarray

    def select(self, rule: str = "min") -> float:
        if rule == "min":
            return self.lambda_min
        if rule == "1se":
            return self.lambda_1se
        raise ContractError(f"unknown CV rule {rule!r} (use 'min' or '1se')")


def cross_validate(problem: LassoProblem, k: int, seed: int, *,
                   n_lambdas: int = DEFAULT_N_LAMBDAS, eps: float = DEFAULT_EPS,
                   tol: float = DEFAULT_TOL,
                   max_sweeps: int = DEFAULT_MAX_SWEEPS) -> CVResult:
    """k-fold cross-validation of the penalty over a shared grid.

    Rows are split into k seeded random folds. For each grid value the mean
    held-out squared prediction error and its standard error across folds
    are computed; ``lambda_min`` minimizes the mean, ``lambda_1se`` is the
    largest penalty whose mean error stays within one standard error of
    that minimum.
    """
    if k < 2:
        raise ContractError(f"need at least 2 folds, got {k}")
    if problem.n < 2 * k:
        raise ContractError(f"need n >= 2k rows for k={k} folds, have n={problem.n}")
    grid = lambda_grid(problem, n_lambdas, eps)
    if grid.size == 0:
        raise ContractError("cross-validation needs at least one penalized coefficient")

    rng = np.random.default_rng(seed)
    folds = np.array_split(rng.permutation(problem.n), k)
    mse = np.empty((k, grid.size))
    for m, test_idx in enumerate(folds):
        mask = np.ones(problem.n, dtype=bool)
        mask[test_idx] = False
        X_tr, y_tr = problem.X[mask], problem.y[mask]
        X_te, y_te = problem.X[test_idx], problem.y[test_idx]
        n_tr = X_tr.shape[0]
        coefs = cd_path_gram(X_tr.T @ X_tr / n_tr, X_tr.T @ y_tr / n_tr,
                             problem.penalty_weights, grid, tol, max_sweeps)
        pred_err = y_te[None, :] - coefs @ X_te.T  # (n_grid, n_test)
        mse[m] = np.mean(pred_err ** 2, axis=1)

    mean_mse = mse.mean(axis=0)
    se_mse = mse.std(axis=0, ddof=1) / np.sqrt(k)
    best = int(np.argmin(mean_mse))  # grid descends: first argmin = largest lambda
    within = np.flatnonzero(mean_mse <= mean_mse[best] + se_mse[best])
    lam_1se = float(grid[within[0]]) if within.size else float(grid[best])
    return CVResult(float(grid[best]), lam_1se, grid, mean_mse, se_mse)
