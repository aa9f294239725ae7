"""Regular-vine structure matrices: representation, validation, tree views.

A d-dimensional regular vine organizes d(d-1)/2 bivariate (conditional)
copulas into d-1 nested trees. The whole tree sequence is encoded by one
lower-triangular integer matrix ``m`` with entries in 1..d:

* the diagonal, read bottom-right to top-left, is the variable ordering
  ``eta(1), ..., eta(d)``;
* column ``c`` (0-based) describes every edge involving the diagonal
  variable ``m[c, c]`` as a conditioned element: the tree-t edge of that
  column pairs ``m[c, c]`` with ``m[d-t, c]`` given the entries below row
  ``d-t``.

Three properties characterize the matrices that encode valid vines: the
column sets must nest left-to-right (i), a diagonal value may not reappear
in the next column (ii), and every cell must be buildable from a column to
its right (iii) -- the matrix form of the proximity condition ("edges joined
in tree t+1 must share a node in tree t").

Matrix positions in this module are 0-based; matrix *entries* are 1-based
variable labels, with 0 marking a not-yet-filled cell of a partial matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, StructureError

UNFILLED = 0


@dataclass(frozen=True)
class Edge:
    """One vine edge: a conditioned pair and its conditioning set."""

    conditioned: tuple
    conditioning: frozenset

    @property
    def union(self) -> frozenset:
        return frozenset(self.conditioned) | self.conditioning

    def __str__(self):
        a, b = self.conditioned
        if self.conditioning:
            cond = ",".join(str(v) for v in sorted(self.conditioning))
            return f"{a},{b}|{cond}"
        return f"{a},{b}"


class RVineMatrix:
    """Lower-triangular structure matrix; may be partial during construction.

    Parameters
    ----------
    m : array-like of int, shape (d, d)
        Lower triangle holds variable labels in 1..d (0 = unfilled);
        everything above the diagonal must be 0.
    """

    def __init__(self, m):
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructureError(f"matrix must be square, got shape {m.shape}")
        if not np.issubdtype(m.dtype, np.integer):
            if not np.all(m == np.floor(m)):
                raise StructureError("matrix entries must be integers")
            m = m.astype(int)
        d = m.shape[0]
        if d < 2:
            raise StructureError("need dimension >= 2")
        if np.any(np.triu(m, 1) != 0):
            raise StructureError("entries above the diagonal must be zero")
        if m.min() < 0 or m.max() > d:
            raise StructureError(f"entries must lie in 0..{d}")
        self._m = m.copy()
        self._m.setflags(write=False)

    @property
    def d(self) -> int:
        return self._m.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._m

    def __getitem__(self, pos):
        return int(self._m[pos])

    def __eq__(self, other):
        return isinstance(other, RVineMatrix) and np.array_equal(self._m, other._m)

    def __repr__(self):
        return f"RVineMatrix(d={self.d})"

    @property
    def diagonal(self) -> tuple:
        return tuple(int(v) for v in np.diag(self._m))

    @property
    def eta(self) -> tuple:
        """Variable ordering eta(1..d): the diagonal read right-to-left."""
        return self.diagonal[::-1]

    def is_complete(self) -> bool:
        return all(
            self._m[r, c] != UNFILLED
            for c in range(self.d)
            for r in range(c, self.d)
        )

    def with_entry(self, row: int, col: int, value: int) -> "RVineMatrix":
        """Return a copy with one cell set (construction helper)."""
        m = self._m.copy()
        m[row, col] = value
        return RVineMatrix(m)


@dataclass(frozen=True)
class Violation:
    """Location and kind of one failed matrix property."""

    prop: str  # "diagonal", "column-distinct", "i", "ii" or "iii"
    row: int
    col: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    @property
    def first(self):
        return self.violations[0] if self.violations else None


def _column_below_masks(m: np.ndarray, d: int):
    """below[c][r] = bitmask of {m[r, c], ..., m[d-1, c]} for r in c..d."""
    below = [[0] * (d + 1) for _ in range(d)]
    for c in range(d):
        acc = 0
        for r in range(d - 1, c - 1, -1):
            acc |= 1 << int(m[r, c])
            below[c][r] = acc
    return below


def _cell_feasible_values(m: np.ndarray, below, row: int, col: int, d: int):
    """Values satisfying the proximity property at cell (row, col).

    A value v works iff some completed column k in (col, row] certifies it:
    either v is k's diagonal and column k's tail below ``row`` equals this
    cell's conditioning set, or v sits at ``m[row+1, k]`` and k's diagonal
    plus its tail below ``row+1`` equals the conditioning set.
    """
    target = below[col][row + 1]
    feasible = set()
    for k in range(col + 1, row + 1):
        if below[k][row + 1] == target:
            feasible.add(int(m[k, k]))
        if row + 1 < d and ((1 << int(m[k, k])) | below[k][row + 2]) == target:
            feasible.add(int(m[row + 1, k]))
    return feasible


def validate(matrix: RVineMatrix, full_report: bool = False) -> ValidationReport:
    """Check the three structure-matrix properties.

    Returns a report whose ``violations`` pinpoint the first failure (or all
    failures with ``full_report=True``). Malformed input -- incomplete
    matrix or a diagonal that is not a permutation of 1..d -- raises
    :class:`StructureError` instead of being reported.
    """
    m = matrix.values
    d = matrix.d
    if not matrix.is_complete():
        raise StructureError("matrix has unfilled cells; validate needs a complete matrix")
    if sorted(matrix.diagonal) != list(range(1, d + 1)):
        raise StructureError(f"diagonal {matrix.diagonal} is not a permutation of 1..{d}")

    violations = []

    def add(prop, row, col, message):
        violations.append(Violation(prop, row, col, message))
        return not full_report  # stop at first unless a full report was asked

    # Entries within a column must be distinct (conditioned and conditioning
    # variables of an edge never repeat).
    for c in range(d):
        seen = {}
        for r in range(c, d):
            v = int(m[r, c])
            if v in seen:
                if add("column-distinct", r, c,
                       f"value {v} appears twice in column {c}"):
                    return ValidationReport(False, tuple(violations))
                break
            seen[v] = r

    # Property (i): the column sets nest left-to-right.
    col_sets = [frozenset(int(v) for v in m[c:, c]) for c in range(d)]
    for c in range(d - 1):
        if not col_sets[c + 1] <= col_sets[c]:
            extra = sorted(col_sets[c + 1] - col_sets[c])
            if add("i", c + 1, c + 1,
                   f"column {c + 1} set is not contained in column {c} "
                   f"(extra values {extra})"):
                return ValidationReport(False, tuple(violations))

    # Property (ii): a diagonal value never reappears in the next column.
    for c in range(d - 1):
        if int(m[c, c]) in col_sets[c + 1]:
            if add("ii", c, c,
                   f"diagonal value {int(m[c, c])} reappears in column {c + 1}"):
                return ValidationReport(False, tuple(violations))

    # Property (iii): every below-diagonal cell is certified by a column to
    # its right (matrix form of the proximity condition).
    below = _column_below_masks(m, d)
    for c in range(d - 2, -1, -1):
        for r in range(c + 1, d):
            v = int(m[r, c])
            if v not in _cell_feasible_values(m, below, r, c, d):
                if add("iii", r, c,
                       f"cell ({r},{c}) value {v} violates the proximity condition"):
                    return ValidationReport(False, tuple(violations))

    return ValidationReport(not violations, tuple(violations))


def edges_of_tree(matrix: RVineMatrix, t: int) -> list:
    """All edges of tree ``t`` (1-based), one per column 0..d-t-1.

    The tree-t edge of column c pairs the diagonal value with the row-(d-t)
    entry, conditioned on everything below that row.
    """
    d = matrix.d
    if not 1 <= t <= d - 1:
        raise ContractError(f"tree index must lie in 1..{d - 1}, got {t}")
    m = matrix.values
    edges = []
    for c in range(d - t):
        conditioned = (int(m[c, c]), int(m[d - t, c]))
        conditioning = frozenset(int(v) for v in m[d - t + 1:, c])
        edges.append(Edge(conditioned, conditioning))
    return edges


def all_edges(matrix: RVineMatrix) -> list:
    """Edges of every tree, as (tree, row, col, Edge) tuples."""
    d = matrix.d
    out = []
    for t in range(1, d):
        for c, edge in enumerate(edges_of_tree(matrix, t)):
            out.append((t, d - t, c, edge))
    return out


def kappa_of(matrix: RVineMatrix, j: int, i: int) -> int:
    """The i-th regressor kappa_i of the j-th equation variable eta(j).

    Both arguments are 1-based domain indices: ``j`` picks the equation
    (variable ``eta(j)``), ``i`` the regressor depth (tree level). Reads
    ``m[d-i, d-j]`` in 0-based positions.
    """
    d = matrix.d
    if not 1 <= j <= d:
        raise ContractError(f"equation index must lie in 1..{d}, got {j}")
    if not 1 <= i < j:
        raise ContractError(f"regressor depth must lie in 1..{j - 1}, got {i}")
    v = matrix[d - i, d - j]
    if v == UNFILLED:
        raise StructureError(f"cell ({d - i},{d - j}) is unfilled")
    return v


def candidate_pool(matrix: RVineMatrix, row: int, col: int) -> set:
    """H(row, col): diagonal values right of ``col`` not yet used in the column."""
    m = matrix.values
    d = matrix.d
    used = {int(m[r, col]) for r in range(row, d)} | {int(m[col, col])}
    return {int(m[k, k]) for k in range(col + 1, d)} - used


def allowed_entries(matrix: RVineMatrix, row: int, col: int) -> set:
    """Values that may fill cell (row, col) without breaking the proximity
    condition, given the partially built matrix.

    Preconditions: every cell strictly below ``row`` is filled in column
    ``col`` and in all columns to its right (rows above ``row`` may still be
    open, so the check works both for column-wise and row-wise filling), and
    the diagonal is set.
    """
    m = matrix.values
    d = matrix.d
    if not (0 <= col < col + 1 <= row <= d - 1):
        raise ContractError(f"cell ({row},{col}) is not strictly below the diagonal")
    for k in range(col + 1, d):
        if m[k, k] == UNFILLED or np.any(m[max(k + 1, row + 1):, k] == UNFILLED):
            raise ContractError(f"column {k} is not filled below row {row}")
    if m[col, col] == UNFILLED or np.any(m[row + 1:, col] == UNFILLED):
        raise ContractError(f"column {col} is not filled below row {row}")

    below = _column_below_masks(m, d)
    feasible = _cell_feasible_values(m, below, row, col, d)
    return feasible & candidate_pool(matrix, row, col)


def blacklist(matrix: RVineMatrix, row: int, col: int) -> set:
    """Candidates of H(row, col) ruled out by the proximity condition."""
    return candidate_pool(matrix, row, col) - allowed_entries(matrix, row, col)


# ---------------------------------------------------------------------------
# Construction from explicit tree sequences
# ---------------------------------------------------------------------------

def matrix_from_trees(trees: list) -> RVineMatrix:
    """Encode an explicit nested-tree sequence as a structure matrix.

    Parameters
    ----------
    trees : list of list of Edge
        ``trees[t-1]`` holds the d-t edges of tree t, labels 1-based. The
        sequence must form a valid regular vine.
    """
    d = len(trees) + 1
    for t, edges in enumerate(trees, start=1):
        if len(edges) != d - t:
            raise StructureError(f"tree {t} must have {d - t} edges, got {len(edges)}")
    remaining = [
        {edge.union: edge for edge in edges}
        for edges in trees
    ]
    m = np.zeros((d, d), dtype=int)
    for c in range(d - 1):
        top = d - 1 - c  # top tree index for this column
        live = remaining[top - 1]
        if len(live) != 1:
            raise StructureError(
                f"tree {top} has {len(live)} undeleted edges, expected 1; "
                "the tree sequence is not a valid regular vine"
            )
        edge = next(iter(live.values()))
        x = min(edge.conditioned)
        m[c, c] = x
        # Walk the chain of edges conditioning x down to tree 1.
        for t in range(top, 0, -1):
            a, b = edge.conditioned
            if x not in (a, b):
                raise StructureError(
                    f"variable {x} is not conditioned in tree-{t} edge {edge}; "
                    "the tree sequence is not a valid regular vine"
                )
            m[d - t, c] = a if b == x else b
            if t > 1:
                sub_union = frozenset({x}) | edge.conditioning
                nxt = remaining[t - 2].get(sub_union)
                if nxt is None:
                    raise StructureError(
                        f"no tree-{t - 1} edge with variables "
                        f"{sorted(sub_union)}; the tree sequence is not nested"
                    )
                edge = nxt
        # Delete x: edges whose variable set contains it are spent.
        for level in remaining:
            for union in [u for u in level if x in u]:
                del level[union]
    last = set(range(1, d + 1)) - {int(m[c, c]) for c in range(d - 1)}
    m[d - 1, d - 1] = last.pop()
    return RVineMatrix(m)


def matrix_from_first_tree(d: int, tree1_edges: list) -> RVineMatrix:
    """Complete a first tree into a full structure matrix.

    Higher trees are chosen greedily (lexicographically first feasible
    join), which is enough when everything above tree 1 will carry
    independence copulas.

    Parameters
    ----------
    d : int
        Number of variables.
    tree1_edges : list of (int, int)
        The d-1 edges of a spanning tree on labels 1..d.
    """
    edges = [Edge(tuple(sorted(e)), frozenset()) for e in tree1_edges]
    if len(edges) != d - 1:
        raise StructureError(f"tree 1 needs {d - 1} edges, got {len(edges)}")
    trees = [edges]
    # Endpoints of each edge viewed as nodes of the next tree: for tree 1
    # the nodes are the variables themselves.
    endpoints = {e.union: frozenset({frozenset({v}) for v in e.conditioned}) for e in edges}
    for t in range(2, d):
        prev = trees[-1]
        nodes = [e.union for e in prev]
        candidates = []
        for idx1 in range(len(nodes)):
            for idx2 in range(idx1 + 1, len(nodes)):
                u1, u2 = nodes[idx1], nodes[idx2]
                if endpoints[u1] & endpoints[u2]:
                    conditioned = tuple(sorted(u1 ^ u2))
                    conditioning = u1 & u2
                    candidates.append(
                        ((conditioned, tuple(sorted(conditioning))),
                         Edge(conditioned, frozenset(conditioning)), u1, u2)
                    )
        candidates.sort(key=lambda item: item[0])
        parent = {u: u for u in nodes}

        def find(u):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        new_edges = []
        new_endpoints = {}
        for _, edge, u1, u2 in candidates:
            r1, r2 = find(u1), find(u2)
            if r1 == r2:
                continue
            parent[r1] = r2
            new_edges.append(edge)
            new_endpoints[edge.union] = frozenset({u1, u2})
            if len(new_edges) == d - t:
                break
        if len(new_edges) != d - t:
            raise StructureError(f"could not span tree {t}; tree 1 was not a tree")
        trees.append(new_edges)
        endpoints = new_endpoints
    return matrix_from_trees(trees)


# ---------------------------------------------------------------------------
# Independence patterns and the SEM view
# ---------------------------------------------------------------------------

class IndependencePattern:
    """Boolean lower triangle: True = fit a (non-independence) pair copula."""

    def __init__(self, gamma):
        g = np.asarray(gamma, dtype=bool)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ContractError(f"pattern must be square, got shape {g.shape}")
        if np.any(np.triu(g) != 0):
            raise ContractError("pattern may only mark cells strictly below the diagonal")
        self._g = g.copy()
        self._g.setflags(write=False)

    @property
    def d(self) -> int:
        return self._g.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._g

    def __getitem__(self, pos):
        return bool(self._g[pos])

    def __eq__(self, other):
        return isinstance(other, IndependencePattern) and np.array_equal(self._g, other._g)

    @classmethod
    def all_true(cls, d: int) -> "IndependencePattern":
        return cls(np.tril(np.ones((d, d), dtype=bool), -1))

    @classmethod
    def all_false(cls, d: int) -> "IndependencePattern":
        return cls(np.zeros((d, d), dtype=bool))

    def count_true(self) -> int:
        return int(self._g.sum())

    def true_cells(self) -> list:
        return [(int(r), int(c)) for r, c in np.argwhere(self._g)]


@dataclass(frozen=True)
class SemModel:
    """Triangular structural-equation view of a structure matrix.

    Equation j (1-based) explains variable ``eta[j-1]`` by the regressors
    ``kappa[j-1]`` with coefficients ``phi[j-1]`` and residual scale
    ``psi[j-1]``; zero coefficients correspond to independence pair copulas.
    """

    eta: tuple
    kappa: tuple  # kappa[j-1][i-1] = i-th regressor of equation j
    phi: tuple    # phi[j-1][i-1] = coefficient on that regressor
    psi: tuple
    r1: tuple = field(default=())  # active regressor set per equation
    r0: tuple = field(default=())  # inactive regressor set per equation


def regressor_sets(matrix: RVineMatrix, pattern: IndependencePattern) -> tuple:
    """Split each equation's potential regressors into active/inactive sets.

    Returns (r1, r0): tuples indexed by equation j-1, where r1 holds the
    regressors whose pattern cell is marked (a pair copula will be fitted)
    and r0 the rest, both ordered by regressor depth.
    """
    d = matrix.d
    if pattern.d != d:
        raise ContractError("pattern dimension does not match the matrix")
    g = pattern.values
    r1, r0 = [], []
    for j in range(1, d + 1):
        active, inactive = [], []
        for i in range(1, j):
            regressor = kappa_of(matrix, j, i)
            if g[d - i, d - j]:
                active.append(regressor)
            else:
                inactive.append(regressor)
        r1.append(tuple(active))
        r0.append(tuple(inactive))
    return tuple(r1), tuple(r0)


# ---------------------------------------------------------------------------
# JSON triangle serialization (shared by structure, lambda, family matrices)
# ---------------------------------------------------------------------------

def triangle_to_rows(values: np.ndarray) -> list:
    """Row-major lower triangle (diagonal included) as nested lists."""
    arr = np.asarray(values)
    d = arr.shape[0]
    return [[arr[r, c].item() for c in range(r + 1)] for r in range(d)]


def rows_to_triangle(rows: list, dtype=float) -> np.ndarray:
    """Inverse of :func:`triangle_to_rows`."""
    d = len(rows)
    out = np.zeros((d, d), dtype=dtype)
    for r, row in enumerate(rows):
        if len(row) != r + 1:
            raise ContractError(f"row {r} must have {r + 1} entries, got {len(row)}")
        out[r, : r + 1] = row
    return out
