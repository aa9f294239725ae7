"""Fitting, scoring, truncating and sampling vines on a fixed structure.

Given a structure matrix and an independence pattern, :func:`fit` walks the
trees bottom-up: pattern-false cells get the independence copula outright,
pattern-true cells are first screened by the Kendall-tau independence test
and otherwise fitted by per-pair likelihood selection. The h-functions of
each fitted tree produce the pseudo-observations of the next.

Every edge's log-likelihood contribution is kept in a ledger so k-truncated
submodels (:func:`truncate`) can be scored without refitting, and
:func:`simulate` draws samples by inverting the same h-functions
(inverse Rosenblatt along the structure diagonal).
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .copulas import (DEFAULT_FAMILIES, INDEPENDENCE, PairCopula, fit_pair,
                      independence_test)
from .data import Dataset, Scale
from .errors import ContractError, NumericError, SparseVineError, StructureError
from .rvine import (IndependencePattern, RVineMatrix, rows_to_triangle,
                    triangle_to_rows, validate)


@dataclass(frozen=True)
class FittedVine:
    """A pair-copula construction: structure plus one copula per cell.

    ``copulas`` and ``edge_loglik`` are keyed by strictly-lower-triangular
    matrix cell ``(row, col)``; cell (row, col) of column col belongs to
    tree ``d - row``.
    """

    structure: RVineMatrix
    copulas: dict
    edge_loglik: dict
    loglik: float
    n_obs: int

    @property
    def d(self) -> int:
        return self.structure.d

    @property
    def n_params(self) -> int:
        return sum(c.n_params for c in self.copulas.values())

    def copula_at(self, row: int, col: int) -> PairCopula:
        return self.copulas[(row, col)]

    @property
    def family_matrix(self) -> np.ndarray:
        """Family codes per cell ('' on and above the diagonal)."""
        d = self.d
        out = np.full((d, d), "", dtype=object)
        for (r, c), cop in self.copulas.items():
            out[r, c] = cop.label
        return out

    def _param_matrix(self, which: int) -> np.ndarray:
        d = self.d
        out = np.zeros((d, d))
        for (r, c), cop in self.copulas.items():
            if len(cop.params) > which:
                out[r, c] = cop.params[which]
        return out

    @property
    def param_matrix(self) -> np.ndarray:
        """First copula parameter per cell (0 where none)."""
        return self._param_matrix(0)

    @property
    def param2_matrix(self) -> np.ndarray:
        """Second copula parameter per cell (degrees of freedom; 0 where none)."""
        return self._param_matrix(1)

    def to_json(self) -> str:
        d = self.d
        fams, prms, lls = [], [], []
        for r in range(1, d):
            fams.append([self.copulas[(r, c)].label for c in range(r)])
            prms.append([list(self.copulas[(r, c)].params) for c in range(r)])
            lls.append([self.edge_loglik[(r, c)] for c in range(r)])
        return json.dumps({
            "structure": triangle_to_rows(self.structure.values),
            "families": fams,
            "params": prms,
            "edge_loglik": lls,
            "loglik": self.loglik,
            "n_obs": self.n_obs,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FittedVine":
        doc = json.loads(text)
        structure = RVineMatrix(rows_to_triangle(doc["structure"], dtype=int))
        copulas, ledger = {}, {}
        for r0, (frow, prow, lrow) in enumerate(zip(doc["families"], doc["params"],
                                                    doc["edge_loglik"])):
            for c, (code, params, ll) in enumerate(zip(frow, prow, lrow)):
                fam, _, rot = code.partition("_")
                copulas[(r0 + 1, c)] = PairCopula(fam, tuple(params),
                                                  int(rot) if rot else 0)
                ledger[(r0 + 1, c)] = float(ll)
        return cls(structure, copulas, ledger, float(doc["loglik"]),
                   int(doc["n_obs"]))


def _require_u(u: Dataset, who: str):
    if u.scale is not Scale.U:
        raise ContractError(f"{who} expects u-scale data, got {u.scale.name}")


def _tree_sweep(uvals: np.ndarray, matrix: RVineMatrix, choose):
    """Walk the trees bottom-up, calling ``choose(r, c, ua, ub)`` per cell.

    ``choose`` returns the cell's PairCopula; its log-density on the cell's
    pseudo-observations is recorded in the ledger. Conditional
    pseudo-observations are propagated through both h-function directions.
    """
    m = matrix.values
    d = matrix.d
    pseudo = {(int(m[c, c]), frozenset()): uvals[:, int(m[c, c]) - 1]
              for c in range(d)}
    copulas, ledger = {}, {}
    for t in range(1, d):
        r = d - t
        for c in range(r):
            a = int(m[c, c])
            b = int(m[r, c])
            cond = frozenset(int(m[k, c]) for k in range(r + 1, d))
            ua = pseudo[(a, cond)]
            ub = pseudo[(b, cond)]
            cop = choose(r, c, ua, ub)
            copulas[(r, c)] = cop
            if cop.family == "independence":
                ledger[(r, c)] = 0.0
            else:
                ledger[(r, c)] = float(cop.log_density(ua, ub).sum())
            if r > 1:
                if cop.family == "independence":
                    pseudo[(a, cond | {b})] = ua
                    pseudo[(b, cond | {a})] = ub
                else:
                    pseudo[(a, cond | {b})] = np.asarray(cop.h(ua, ub))
                    pseudo[(b, cond | {a})] = np.asarray(cop.h_second(ub, ua))
    return copulas, ledger


def fit(u: Dataset, matrix: RVineMatrix, pattern: IndependencePattern,
        families=DEFAULT_FAMILIES, alpha: float = 0.05,
        criterion: str = "aic") -> FittedVine:
    """Fit pair copulas tree by tree on a fixed structure.

    Pattern-false cells become independence copulas without touching the
    data. Pattern-true cells are screened with the Kendall-tau independence
    test at level ``alpha`` (``alpha = 0`` disables the screen) and
    otherwise fitted over the candidate ``families``.
    """
    _require_u(u, "fit")
    d = matrix.d
    if pattern.d != d:
        raise ContractError(f"pattern is {pattern.d}-dimensional, matrix is {d}")
    if u.d != d:
        raise ContractError(f"data has {u.d} columns, matrix is {d}-dimensional")
    if u.n < 10:
        raise ContractError(f"fitting needs n >= 10, got {u.n}")
    report = validate(matrix)
    if not report.ok:
        raise StructureError(f"matrix fails validation: {report.first}")

    gamma = pattern.values

    def choose(r, c, ua, ub):
        if not gamma[r, c]:
            return INDEPENDENCE
        try:
            if alpha > 0.0 and independence_test(ua, ub, alpha):
                return INDEPENDENCE
            return fit_pair(ua, ub, families, criterion).copula
        except SparseVineError as exc:
            a, b = int(matrix.values[c, c]), int(matrix.values[r, c])
            raise NumericError(f"pair fit failed on edge {a},{b} "
                               f"(cell {r + 1},{c + 1}): {exc}") from exc

    copulas, ledger = _tree_sweep(u.values, matrix, choose)
    return FittedVine(matrix, copulas, ledger, sum(ledger.values()), u.n)


def compute_loglik(vine: FittedVine, u: Dataset) -> float:
    """Recompute the log-likelihood of ``vine`` on ``u`` from scratch."""
    _require_u(u, "compute_loglik")
    if u.d != vine.d:
        raise ContractError(f"data has {u.d} columns, vine is {vine.d}-dimensional")
    _, ledger = _tree_sweep(u.values, vine.structure,
                            lambda r, c, ua, ub: vine.copulas[(r, c)])
    return sum(ledger.values())


class InformationCriteria(NamedTuple):
    aic: float
    bic: float
    mbic: float


def information_criteria(vine: FittedVine, n: int = None) -> InformationCriteria:
    """AIC, BIC and the modified BIC of a fitted vine.

    The modified criterion uses the potential parameter count q = d(d-1)
    and subtracts both a log-factorial and a sum of iterated logarithms;
    summands whose inner logarithm drops to 1 or below (tiny n) are skipped
    with a warning, since the criterion is built for n * q*q / j large.
    """
    n = vine.n_obs if n is None else n
    if n < 1:
        raise ContractError(f"need a positive sample count, got {n}")
    p = vine.n_params
    ll = vine.loglik
    aic = -2.0 * ll + 2.0 * p
    bic = -2.0 * ll + p * math.log(n)
    q = vine.d * (vine.d - 1)
    mbic = -2.0 * ll + p * math.log(n * q * q) - 2.0 * math.lgamma(p + 1)
    for j in range(1, p + 1):
        inner = math.log(n * q * q / j)
        if inner <= 1.0:
            warnings.warn(f"dropping iterated-log term {j} of mBIC "
                          f"(log(n*q^2/{j}) = {inner:.3f} <= 1)")
            continue
        mbic -= math.log(inner)
    return InformationCriteria(aic, bic, mbic)


def truncate(vine: FittedVine, k: int) -> FittedVine:
    """Force every tree above level ``k`` to independence.

    The per-edge ledger makes this a bookkeeping operation: no refit, the
    retained trees keep their copulas and log-likelihood contributions.
    """
    d = vine.d
    if not 1 <= k <= d - 2:
        raise ContractError(f"truncation level must lie in 1..{d - 2}, got {k}")
    copulas, ledger = {}, {}
    for (r, c), cop in vine.copulas.items():
        if d - r > k:
            copulas[(r, c)] = INDEPENDENCE
            ledger[(r, c)] = 0.0
        else:
            copulas[(r, c)] = cop
            ledger[(r, c)] = vine.edge_loglik[(r, c)]
    return FittedVine(vine.structure, copulas, ledger, sum(ledger.values()),
                      vine.n_obs)


def _conditional(vine: FittedVine, var: int, cond: frozenset, memo: dict,
                 edges_by_level: dict):
    """F(u_var | u_cond) via the vine's h-functions, memoized.

    Grounded at the simulated (or observed) columns stored under empty
    conditioning sets in ``memo``.
    """
    key = (var, cond)
    if key in memo:
        return memo[key]
    if not cond:
        raise StructureError(f"no grounding sample for variable {var}")
    # The edge providing F(var | cond) conditions on one variable fewer:
    # its conditioned pair is {var, e} with e in cond.
    for (r, c), (a, b, edge_cond) in edges_by_level[len(cond) - 1].items():
        if edge_cond <= cond and (cond | {var}) == edge_cond | {a, b}:
            cop = vine.copulas[(r, c)]
            ua = _conditional(vine, a, edge_cond, memo, edges_by_level)
            ub = _conditional(vine, b, edge_cond, memo, edges_by_level)
            if var == a:
                out = ua if cop.family == "independence" else np.asarray(cop.h(ua, ub))
            else:
                out = ub if cop.family == "independence" else np.asarray(cop.h_second(ub, ua))
            memo[key] = out
            return out
    raise StructureError(f"no edge provides the conditional of {var} given "
                         f"{sorted(cond)}")


def _edges_by_level(matrix: RVineMatrix) -> dict:
    m = matrix.values
    d = matrix.d
    levels = {t - 1: {} for t in range(1, d)}
    for t in range(1, d):
        r = d - t
        for c in range(r):
            cond = frozenset(int(m[k, c]) for k in range(r + 1, d))
            levels[t - 1][(r, c)] = (int(m[c, c]), int(m[r, c]), cond)
    return levels


def _simulate_block(vine: FittedVine, n: int, rng) -> np.ndarray:
    m = vine.structure.values
    d = vine.d
    w = rng.uniform(size=(n, d))
    out = np.empty((n, d))
    memo = {}
    levels = _edges_by_level(vine.structure)
    for c in range(d - 1, -1, -1):
        var = int(m[c, c])
        p = w[:, c]
        for r in range(c + 1, d):
            cop = vine.copulas[(r, c)]
            if cop.family == "independence":
                continue
            cond = frozenset(int(m[k, c]) for k in range(r + 1, d))
            partner = _conditional(vine, int(m[r, c]), cond, memo, levels)
            p = np.asarray(cop.h_inverse(p, partner))
        memo[(var, frozenset())] = p
        out[:, var - 1] = p
    return out


def simulate(vine: FittedVine, n: int, seed: int, workers: int = 1) -> Dataset:
    """Draw ``n`` samples by inverse Rosenblatt along the diagonal.

    With ``workers > 1`` the rows split into blocks, one worker and one
    derived seed per block; output is deterministic per ``(seed, workers)``.
    """
    if n < 1:
        raise ContractError(f"need a positive sample count, got {n}")
    if workers <= 1:
        values = _simulate_block(vine, n, np.random.default_rng(seed))
        return Dataset(values, Scale.U)
    bounds = np.array_split(np.arange(n), workers)
    seeds = np.random.SeedSequence(seed).spawn(workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(
            lambda args: _simulate_block(vine, len(args[0]),
                                         np.random.default_rng(args[1])),
            [(idx, s) for idx, s in zip(bounds, seeds) if len(idx)]))
    return Dataset(np.vstack(blocks), Scale.U)
