"""Lasso-guided selection of a vine structure matrix.

The pipeline has three stages, all operating on probit-transformed
(z-scale) data:

1. ``lasso_ordering`` ranks the variables by how often each one is picked
   as a regressor across d cross-validated lasso regressions. The rank
   permutation fixes the structure-matrix diagonal.
2. ``select_first_tree`` regresses each variable on all lower-ranked ones
   with a full penalty path and links it to the regressor that activates
   first; those links form the first tree.
3. ``select_higher_trees`` fills the remaining matrix cells tree by tree.
   Each cell consumes the next activation from its column's stored path.
   When that activation is structurally inadmissible (a proximity-condition
   failure) or the path is exhausted, the regression is re-solved with the
   column's already-placed regressors forced active (penalty weight zero)
   and the inadmissible ones excluded, and the first penalized activation
   of the new path is taken instead.

The per-cell activation penalties are collected into a lambda matrix
aligned with the structure matrix; thresholding that matrix (see
:mod:`sparsevine.thresholds`) yields independence patterns of any desired
sparsity without re-running a single regression.

Variables are relabeled internally so rank j is variable j; results are
mapped back to the caller's labels on emission.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Scale
from .errors import ContractError, NumericError, StructureError
from .lasso import LassoProblem, cross_validate, path, solve
from .rvine import (UNFILLED, IndependencePattern, RVineMatrix, SemModel,
                    allowed_entries, blacklist, candidate_pool, kappa_of,
                    regressor_sets, rows_to_triangle, triangle_to_rows,
                    validate)


def _require_z(z: Dataset, who: str):
    if z.scale is not Scale.Z:
        raise ContractError(f"{who} expects z-scale data, got {z.scale.name}")


@dataclass(frozen=True)
class OrderingResult:
    """Variable ranking from cross-validated lasso occurrence counts.

    ``eta[k-1]`` is the variable (1-based caller label) holding rank k;
    higher occurrence counts get lower ranks, ties are broken by a seeded
    shuffle.
    """

    eta: tuple
    occurrence_counts: tuple  # indexed by variable label - 1
    lambdas: tuple            # CV penalty chosen for each variable's regression
    rng_seed: int


def lasso_ordering(z: Dataset, k_folds: int = 10, seed: int = 0,
                   cv_rule: str = "min", workers: int = 1) -> OrderingResult:
    """Rank variables by regressor-occurrence counts under CV-tuned lassos.

    Each variable is regressed on all others at the penalty its own k-fold
    cross-validation selects; every variable then counts in how many of the
    other regressions its coefficient is nonzero. Ranks sort the counts in
    descending order. The d regressions are independent; ``workers > 1``
    runs them on a thread pool (the solver kernels drop the GIL) without
    changing the result.
    """
    _require_z(z, "lasso_ordering")
    if z.d < 3:
        raise ContractError(f"ordering needs at least 3 variables, got {z.d}")
    x = z.values
    d = z.d
    seq = np.random.SeedSequence(seed)
    fold_seeds = [int(s.generate_state(1)[0]) for s in seq.spawn(d)]

    def regress(i):
        others = np.delete(np.arange(d), i)
        problem = LassoProblem(x[:, others], x[:, i])
        lam = cross_validate(problem, k_folds, fold_seeds[i]).select(cv_rule)
        return others, solve(problem, lam), lam

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fits = list(pool.map(regress, range(d)))
    else:
        fits = [regress(i) for i in range(d)]

    counts = np.zeros(d, dtype=int)
    lambdas = []
    for others, coef, lam in fits:
        counts[others[np.flatnonzero(coef)]] += 1
        lambdas.append(lam)

    tiebreak = np.random.default_rng(seed).permutation(d)
    ranked = sorted(range(d), key=lambda v: (-counts[v], tiebreak[v]))
    return OrderingResult(tuple(v + 1 for v in ranked), tuple(int(c) for c in counts),
                          tuple(lambdas), seed)


@dataclass
class _ColumnState:
    """Consumption pointer into the current activation path of one column."""

    equation: int       # internal (rank) label of the column's variable
    order: list         # remaining activation order, internal labels
    lambdas: list       # entry penalty per label in ``order``
    pos: int = 0

    def peek(self):
        if self.pos >= len(self.order):
            return None
        return self.order[self.pos], self.lambdas[self.pos]

    def advance(self):
        self.pos += 1


def _equation_path(x: np.ndarray, equation: int, whitelist=(), excluded=()):
    """Activation path of internal variable ``equation`` on ranks below it.

    Returns (labels, penalties) for the penalized coefficients only:
    whitelisted ones (weight 0) are forced active and not listed, excluded
    ones (weight inf) never appear.
    """
    n_reg = equation - 1
    weights = np.ones(n_reg)
    for label in whitelist:
        weights[label - 1] = 0.0
    for label in excluded:
        weights[label - 1] = np.inf
    problem = LassoProblem(x[:, :n_reg], x[:, equation - 1], penalty_weights=weights)
    reg_path = path(problem)
    labels, penalties = [], []
    for idx, lam in reg_path.entries:
        if np.isinf(lam):
            continue  # whitelist head
        labels.append(idx + 1)
        penalties.append(lam)
    return labels, penalties


@dataclass
class FirstTreeState:
    """Partial structure after the first tree, in internal (rank) labels."""

    matrix: RVineMatrix
    lambda_matrix: np.ndarray        # bottom row filled; NaN elsewhere
    states: dict                     # column index -> _ColumnState
    design: np.ndarray               # rank-relabeled z-scale data
    eta: tuple                       # rank -> caller label


def select_first_tree(z: Dataset, eta, workers: int = 1) -> FirstTreeState:
    """Fix the diagonal and bottom row of the structure matrix.

    Variables are relabeled so rank j is variable j. For j = 3..d the full
    unpenalized-limit path of variable j on variables 1..j-1 is computed;
    the first activation becomes j's first-tree partner and the path is
    stored for the higher trees. Rank 2 is linked to rank 1 without a
    regression; its penalty is the exact soft-threshold activation point
    |<z_1, z_2>| / n. The per-column paths are independent regressions;
    ``workers > 1`` computes them on a thread pool.
    """
    _require_z(z, "select_first_tree")
    d = z.d
    eta = tuple(int(v) for v in eta)
    if sorted(eta) != list(range(1, d + 1)):
        raise ContractError("eta must be a permutation of 1..d")

    x = z.values[:, [v - 1 for v in eta]]
    m = np.zeros((d, d), dtype=int)
    lam = np.full((d, d), np.nan)
    for c in range(d):
        m[c, c] = d - c

    if workers > 1 and d > 3:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(lambda c: _equation_path(x, d - c),
                                  range(d - 2)))
    else:
        paths = [_equation_path(x, d - c) for c in range(d - 2)]

    states = {}
    for c, (labels, penalties) in enumerate(paths):
        state = _ColumnState(d - c, labels, penalties)
        kappa1, entry_lam = state.peek()
        state.advance()
        m[d - 1, c] = kappa1
        lam[d - 1, c] = entry_lam
        states[c] = state
    if d >= 2:
        m[d - 1, d - 2] = 1
        lam[d - 1, d - 2] = abs(float(x[:, 0] @ x[:, 1])) / z.n

    return FirstTreeState(RVineMatrix(m), lam, states, x, eta)


@dataclass(frozen=True)
class PcfEvent:
    """One proximity-condition failure: where, what was rejected, and the
    forced/forbidden regressor sets of the re-solved regression (caller
    labels)."""

    tree: int
    row: int            # 1-based matrix coordinates
    col: int
    rejected: int       # rejected candidate, or 0 when the path was exhausted
    whitelist: tuple
    blacklist: tuple


@dataclass(frozen=True)
class StructureResult:
    """Complete structure matrix with its regularization-path matrix."""

    matrix: RVineMatrix
    lambda_matrix: np.ndarray
    ordering: OrderingResult
    pcf_events: tuple = ()

    def to_json(self) -> str:
        doc = {
            "matrix": triangle_to_rows(self.matrix.values),
            "lambda": triangle_to_rows(np.nan_to_num(self.lambda_matrix, nan=0.0,
                                                     posinf=-1.0)),
            "eta": list(self.ordering.eta),
            "occurrence_counts": list(self.ordering.occurrence_counts),
            "cv_lambdas": list(self.ordering.lambdas),
            "seed": self.ordering.rng_seed,
            "pcf_events": [
                {"tree": e.tree, "row": e.row, "col": e.col,
                 "rejected": e.rejected, "whitelist": list(e.whitelist),
                 "blacklist": list(e.blacklist)}
                for e in self.pcf_events
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "StructureResult":
        doc = json.loads(text)
        matrix = RVineMatrix(rows_to_triangle(doc["matrix"], dtype=int))
        lam = rows_to_triangle(doc["lambda"], dtype=float)
        lam[lam == -1.0] = np.inf
        d = matrix.d
        lam[np.triu_indices(d)] = np.nan
        lam[np.diag_indices(d)] = np.nan
        ordering = OrderingResult(tuple(doc["eta"]), tuple(doc["occurrence_counts"]),
                                  tuple(doc["cv_lambdas"]), doc["seed"])
        events = tuple(PcfEvent(e["tree"], e["row"], e["col"], e["rejected"],
                                tuple(e["whitelist"]), tuple(e["blacklist"]))
                       for e in doc["pcf_events"])
        return cls(matrix, lam, ordering, events)


def _fill_cell(partial: RVineMatrix, r: int, c: int, state: _ColumnState,
               x: np.ndarray, pcf_log: list):
    """Choose the entry and penalty for cell (r, c) of the partial matrix."""
    d = partial.d
    allowed = allowed_entries(partial, r, c)

    if not allowed:
        # Unreachable for a well-formed partial matrix (the candidate pool
        # always retains a feasible value); kept as a guarded fallback.
        pool = candidate_pool(partial, r, c)
        if len(pool) == 1:
            return pool.pop(), 0.0
        raise StructureError(f"no admissible entry for cell ({r + 1},{c + 1})")

    nxt = state.peek()
    if nxt is not None and nxt[0] in allowed:
        state.advance()
        return nxt

    # Proximity-condition failure (or exhausted path): re-solve with the
    # column's placed regressors forced active and inadmissible ones excluded.
    rejected = 0 if nxt is None else nxt[0]
    white = tuple(int(partial.values[k, c]) for k in range(d - 1, r, -1))
    black = tuple(sorted(blacklist(partial, r, c)))
    labels, penalties = _equation_path(x, state.equation, white, black)
    if not labels or labels[0] not in allowed:
        raise StructureError(
            f"re-solved path for cell ({r + 1},{c + 1}) produced no admissible "
            f"activation (allowed {sorted(allowed)}, got {labels[:1]})")
    state.order, state.lambdas, state.pos = labels, penalties, 1
    pcf_log.append((d - r, r + 1, c + 1, rejected, white, black))
    return labels[0], penalties[0]


def select_higher_trees(first: FirstTreeState,
                        ordering: OrderingResult = None) -> StructureResult:
    """Complete the structure matrix row by row and collect the penalties.

    Rows are processed bottom-up (tree by tree); each row's cells consume
    their column's stored path, re-solving on proximity-condition failures.
    The finished matrix is validated, then mapped back to caller labels.
    """
    d = first.matrix.d
    m = first.matrix
    lam = first.lambda_matrix.copy()
    pcf_log = []
    for r in range(d - 2, 0, -1):
        for c in range(r):
            value, entry_lam = _fill_cell(m, r, c, first.states[c],
                                          first.design, pcf_log)
            m = m.with_entry(r, c, value)
            lam[r, c] = entry_lam

    report = validate(m)
    if not report.ok:
        raise StructureError(f"selected matrix fails validation: {report.first}")

    eta = first.eta
    relabeled = np.zeros((d, d), dtype=int)
    rows, cols = np.tril_indices(d)
    relabeled[rows, cols] = [eta[v - 1] for v in m.values[rows, cols]]
    events = tuple(PcfEvent(t, rr, cc, 0 if rej == 0 else eta[rej - 1],
                            tuple(eta[v - 1] for v in white),
                            tuple(eta[v - 1] for v in black))
                   for t, rr, cc, rej, white, black in pcf_log)
    if ordering is None:
        ordering = OrderingResult(eta, (0,) * d, (0.0,) * d, 0)
    return StructureResult(RVineMatrix(relabeled), lam, ordering, events)


def select_structure(z: Dataset, k_folds: int = 10, seed: int = 0,
                     cv_rule: str = "min", workers: int = 1) -> StructureResult:
    """Full pipeline: ordering, first tree, higher trees."""
    _require_z(z, "select_structure")
    if z.d == 2:
        rng_eta = tuple(int(v) for v in np.random.default_rng(seed).permutation(2) + 1)
        ordering = OrderingResult(rng_eta, (0, 0), (0.0, 0.0), seed)
    else:
        ordering = lasso_ordering(z, k_folds, seed, cv_rule, workers)
    first = select_first_tree(z, ordering.eta, workers)
    return select_higher_trees(first, ordering)


def assemble_sem(z: Dataset, matrix: RVineMatrix,
                 pattern: IndependencePattern) -> SemModel:
    """Build the structural-equation view of a structure matrix.

    Equation j explains the rank-j variable by the regressors the pattern
    keeps active; coefficients come from an ordinary unpenalized refit on
    those regressors alone, and each residual scale is set so the equation's
    total variance is one.
    """
    _require_z(z, "assemble_sem")
    d = matrix.d
    report = validate(matrix)
    if not report.ok:
        raise StructureError(f"matrix fails validation: {report.first}")
    r1, r0 = regressor_sets(matrix, pattern)
    eta = matrix.eta

    kappa, phi, psi = [], [], []
    for j in range(1, d + 1):
        regressors = tuple(kappa_of(matrix, j, i) for i in range(1, j))
        kappa.append(regressors)
        active = r1[j - 1]
        coefs = dict.fromkeys(regressors, 0.0)
        if active:
            design = z.values[:, [v - 1 for v in active]]
            y = z.values[:, eta[j - 1] - 1]
            beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
            if rank < len(active):
                raise NumericError(
                    f"singular refit design for equation {j} (regressors {active})")
            coefs.update(zip(active, beta))
            fitted = design @ beta
            scale = float(np.sqrt(max(0.0, 1.0 - np.mean(fitted ** 2))))
        else:
            scale = 1.0
        phi.append(tuple(coefs[v] for v in regressors))
        psi.append(scale)

    return SemModel(eta, tuple(kappa), tuple(phi), tuple(psi), r1, r0)
