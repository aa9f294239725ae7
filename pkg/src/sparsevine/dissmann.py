"""Greedy spanning-tree baseline for vine model selection.

Builds the vine bottom-up: each tree is a maximum spanning tree on the
absolute empirical Kendall tau of the admissible pairs (admissible = the
two previous-tree edges share a node), each selected edge is screened for
independence and fitted over the candidate families, and the fitted
h-functions produce the next tree's pseudo-observations. An optional
truncation level stops the fitting early; later trees carry independence
copulas and are completed lexicographically so that a full structure
matrix can still be extracted.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .copulas import (DEFAULT_FAMILIES, INDEPENDENCE, fit_pair,
                      independence_test, kendall_tau)
from .data import Dataset
from .errors import ContractError, NumericError, SparseVineError, StructureError
from .estimation import FittedVine, _require_u
from .rvine import Edge, matrix_from_trees, validate


@dataclass(frozen=True)
class DissmannConfig:
    """Knobs of the greedy baseline fit.

    Parameters
    ----------
    families : tuple of str
        Candidate pair-copula families for each edge.
    alpha : float
        Level of the per-edge Kendall-tau independence screen; 0 disables.
    criterion : str
        Per-edge family selection criterion, "aic" or "bic".
    truncation : int, optional
        Truncation level k; trees k+1 and above get independence copulas
        without fitting. Must lie in 1..d-2 for d-dimensional data.
    """

    families: tuple = DEFAULT_FAMILIES
    alpha: float = 0.05
    criterion: str = "aic"
    truncation: int | None = None

    def __post_init__(self):
        if not self.families:
            raise ContractError("need at least one candidate family")
        if not 0.0 <= self.alpha < 1.0:
            raise ContractError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.truncation is not None and (
                int(self.truncation) != self.truncation or self.truncation < 1):
            raise ContractError(
                f"truncation level must be a positive integer, got {self.truncation}")


def _max_spanning_tree(node_ids, candidates):
    """Kruskal over ``(weight, label, payload, node1, node2)`` candidates.

    Heaviest weight first, ties broken by lexicographic label; returns the
    payloads of the selected spanning-tree edges in selection order.
    """
    parent = {u: u for u in node_ids}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    chosen = []
    for _, _, payload, u1, u2 in sorted(candidates,
                                        key=lambda it: (-it[0], it[1])):
        r1, r2 = find(u1), find(u2)
        if r1 == r2:
            continue
        parent[r1] = r2
        chosen.append(payload)
        if len(chosen) == len(node_ids) - 1:
            break
    if len(chosen) != len(node_ids) - 1:
        raise StructureError(
            "admissible edge set does not span the tree nodes; "
            "the previous tree was not connected")
    return chosen


def _edge_weights(pairs, weight_fn, workers):
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda ab: weight_fn(ab[0], ab[1]), pairs))
    return [weight_fn(ua, ub) for ua, ub in pairs]


def _abs_tau(ua, ub) -> float:
    return abs(kendall_tau(ua, ub))


def fit_dissmann(u: Dataset, cfg: DissmannConfig = None, *,
                 weight_fn=None, workers: int = 1) -> FittedVine:
    """Fit a vine by greedy tree-by-tree maximum spanning trees.

    Tree 1 is the maximum spanning tree of the complete graph on the
    variables weighted by the absolute empirical Kendall tau; every later
    tree is the maximum spanning tree of the admissible pairs (previous
    edges sharing a node). Each selected edge is screened for independence
    at level ``cfg.alpha`` and otherwise fitted over ``cfg.families``; its
    h-functions yield the pseudo-observations for the next tree. With
    ``cfg.truncation = k`` set, trees above k carry independence copulas
    and are completed by the lexicographically first feasible joins.

    Parameters
    ----------
    u : Dataset
        U-scale observations, n >= 10, d >= 3.
    cfg : DissmannConfig, optional
        Fit configuration; defaults to ``DissmannConfig()``.
    weight_fn : callable, optional
        Replacement edge weight ``(ua, ub) -> float``; defaults to the
        absolute Kendall tau.
    workers : int
        Thread count for candidate-weight evaluation; selection and
        fitting stay sequential per tree.

    Returns
    -------
    FittedVine
    """
    cfg = DissmannConfig() if cfg is None else cfg
    _require_u(u, "fit_dissmann")
    n, d = u.n, u.d
    if d < 3:
        raise ContractError(f"need at least 3 variables, got {d}")
    if n < 10:
        raise ContractError(f"fitting needs n >= 10, got {n}")
    top = d - 1 if cfg.truncation is None else int(cfg.truncation)
    if top > d - 2 and cfg.truncation is not None:
        raise ContractError(
            f"truncation level {cfg.truncation} out of range 1..{d - 2}")
    weight_fn = _abs_tau if weight_fn is None else weight_fn

    x = u.values
    # F(var | conditioning set), keyed like the estimation sweep.
    pseudo = {(j, frozenset()): x[:, j - 1] for j in range(1, d + 1)}
    # Fitted copula, log-likelihood and the orientation it was fitted in,
    # keyed by (conditioned pair, conditioning set).
    fitted = {}

    def fit_edge(edge, ua, ub):
        try:
            if cfg.alpha > 0.0 and independence_test(ua, ub, cfg.alpha):
                return INDEPENDENCE, 0.0
            res = fit_pair(ua, ub, cfg.families, cfg.criterion)
            return res.copula, res.loglik
        except SparseVineError as exc:
            raise NumericError(f"pair fit failed on edge {edge}: {exc}") from exc

    trees = []
    # Nodes of the next tree: previous edges, identified by their variable
    # set; ``endpoints`` maps each to the pair of previous-tree nodes it
    # joined, which is what the proximity condition inspects.
    endpoints = None
    for t in range(1, d):
        if t == 1:
            node_ids = list(range(1, d + 1))
            raw = [((a, b), Edge((a, b), frozenset()), a, b)
                   for a in node_ids for b in node_ids[a:]]
        else:
            prev = trees[-1]
            node_ids = [e.union for e in prev]
            raw = []
            for i in range(len(prev)):
                for j in range(i + 1, len(prev)):
                    u1, u2 = node_ids[i], node_ids[j]
                    if not endpoints[u1] & endpoints[u2]:
                        continue
                    conditioned = tuple(sorted(u1 ^ u2))
                    label = (conditioned, tuple(sorted(u1 & u2)))
                    raw.append((label, Edge(conditioned, u1 & u2), u1, u2))
        if t <= top:
            weights = _edge_weights(
                [(pseudo[(e.conditioned[0], e.conditioning)],
                  pseudo[(e.conditioned[1], e.conditioning)])
                 for _, e, _, _ in raw],
                weight_fn, workers)
        else:
            # Beyond the truncation level only the structure matters;
            # zero weights make Kruskal purely lexicographic.
            weights = [0.0] * len(raw)
        candidates = [(w, label, (edge, u1, u2), u1, u2)
                      for w, (label, edge, u1, u2) in zip(weights, raw)]
        selected = _max_spanning_tree(node_ids, candidates)

        new_edges, new_endpoints = [], {}
        for edge, u1, u2 in selected:
            a, b = edge.conditioned
            if t <= top:
                ua = pseudo[(a, edge.conditioning)]
                ub = pseudo[(b, edge.conditioning)]
                cop, ll = fit_edge(edge, ua, ub)
                if t < top:
                    if cop.family == "independence":
                        pseudo[(a, edge.conditioning | {b})] = ua
                        pseudo[(b, edge.conditioning | {a})] = ub
                    else:
                        pseudo[(a, edge.conditioning | {b})] = np.asarray(cop.h(ua, ub))
                        pseudo[(b, edge.conditioning | {a})] = np.asarray(
                            cop.h_second(ub, ua))
            else:
                cop, ll = INDEPENDENCE, 0.0
            fitted[(frozenset(edge.conditioned), edge.conditioning)] = (
                cop, ll, edge.conditioned)
            new_edges.append(edge)
            new_endpoints[edge.union] = frozenset({u1, u2})
        trees.append(new_edges)
        endpoints = new_endpoints

    matrix = matrix_from_trees(trees)
    report = validate(matrix)
    if not report.ok:
        raise StructureError(f"extracted matrix fails validation: {report.first}")

    m = matrix.values
    copulas, ledger = {}, {}
    for c in range(d - 1):
        for r in range(c + 1, d):
            a, b = int(m[c, c]), int(m[r, c])
            cond = frozenset(int(m[k, c]) for k in range(r + 1, d))
            cop, ll, orient = fitted[(frozenset((a, b)), cond)]
            if (a, b) != orient:
                # The matrix conditions in the other order; for 90/270
                # rotations that is the opposite rotation.
                cop = cop._swapped()
            copulas[(r, c)] = cop
            ledger[(r, c)] = ll
    return FittedVine(matrix, copulas, ledger, sum(ledger.values()), n)
