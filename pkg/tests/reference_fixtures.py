"""Hand-checked reference values shared by the golden-fixture tests.

Everything in this file was worked out independently (by hand or with a
brute-force script) before the corresponding library code ran it, and is
frozen here so regressions are caught against numbers, not against the
implementation under test.
"""

import numpy as np


def lower_triangular(rows, dtype=int):
    """Build a dense square matrix from nested lower-triangle rows."""
    d = len(rows)
    out = np.zeros((d, d), dtype=dtype)
    for r, row in enumerate(rows):
        out[r, : len(row)] = row
    return out


# ---------------------------------------------------------------------------
# A 6-dimensional structure matrix with a fully worked-out edge list.
# ---------------------------------------------------------------------------

M6_ROWS = [
    [4],
    [1, 5],
    [3, 1, 3],
    [6, 3, 1, 6],
    [2, 6, 2, 1, 2],
    [5, 2, 6, 2, 1, 1],
]
M6 = lower_triangular(M6_ROWS)

# Edges per tree: (conditioned pair, conditioning set), in column order
# (diagonal variable first in each conditioned pair).
M6_EDGES = {
    1: [((4, 5), ()), ((5, 2), ()), ((3, 6), ()), ((6, 2), ()), ((2, 1), ())],
    2: [((4, 2), (5,)), ((5, 6), (2,)), ((3, 2), (6,)), ((6, 1), (2,))],
    3: [((4, 6), (2, 5)), ((5, 3), (2, 6)), ((3, 1), (2, 6))],
    4: [((4, 3), (2, 5, 6)), ((5, 1), (2, 3, 6))],
    5: [((4, 1), (2, 3, 5, 6))],
}

# Ordering eta(1..6) = diagonal right-to-left.
M6_ETA = (1, 2, 6, 3, 5, 4)

# Regressor assignments kappa_i(eta(j)): row j maps to the tuple
# (kappa_1, ..., kappa_{j-1}).
M6_KAPPA = {
    1: (),
    2: (1,),
    3: (2, 1),
    4: (6, 2, 1),
    5: (2, 6, 3, 1),
    6: (5, 2, 6, 3, 1),
}

# A family pattern on M6 (1 = pair copula, 0 = independence), strictly
# lower-triangular rows, plus the regressor splits it induces. Keyed by the
# explained variable eta(j).
M6_GAMMA_ROWS = [
    [0],
    [1, 1],
    [0, 0, 1],
    [1, 0, 0, 1],
    [1, 1, 1, 1, 1],
]
M6_RSETS = {
    1: ((), (), ()),
    2: ((1,), (1,), ()),
    6: ((2, 1), (2, 1), ()),
    3: ((6, 2, 1), (6, 1), (2,)),
    5: ((2, 6, 3, 1), (2, 1), (6, 3)),
    4: ((5, 2, 6, 3, 1), (5, 2, 3), (6, 1)),
}


# ---------------------------------------------------------------------------
# A partially built 6-dimensional matrix mid-way through higher-tree
# selection, with the proximity-condition bookkeeping for cell (4, 0).
# ---------------------------------------------------------------------------

PARTIAL6_ROWS = [
    [3],
    [0, 2],
    [0, 0, 1],
    [0, 0, 0, 4],
    [0, 0, 0, 6, 6],
    [2, 5, 4, 5, 5, 5],
]
PARTIAL6 = lower_triangular(PARTIAL6_ROWS)
PARTIAL6_CELL = (4, 0)
PARTIAL6_ALLOWED = {5}
PARTIAL6_BLACKLIST = {1, 4, 6}
PARTIAL6_WHITELIST = {2}

# Completions of PARTIAL6 selected by two different algorithms on the same
# data; used to check both are accepted as valid structures.
LASSO6_ROWS = [
    [3],
    [6, 2],
    [1, 6, 1],
    [4, 1, 6, 4],
    [5, 4, 5, 6, 6],
    [2, 5, 4, 5, 5, 5],
]
DISSMANN6_ROWS = [
    [3],
    [6, 2],
    [1, 6, 1],
    [4, 1, 6, 4],
    [5, 4, 5, 6, 5],
    [2, 5, 4, 5, 6, 6],
]


# ---------------------------------------------------------------------------
# An entry-penalty matrix with hand-computed threshold patterns.
# ---------------------------------------------------------------------------

LAMBDA6_ROWS = [
    [0.0],
    [0.0072, 0.0],
    [0.0082, 0.0039, 0.0],
    [0.0005, 0.0091, 0.4993, 0.0],
    [0.0538, 0.0210, 0.6601, 0.1344, 0.0],
    [0.3171, 0.3117, 0.7244, 0.9481, 0.9378, 0.0],
]
LAMBDA6 = lower_triangular(LAMBDA6_ROWS, dtype=float)

# Single threshold 0.1: keep entries >= 0.1 (8 of them).
GAMMA6_SINGLE_01_ROWS = [
    [0],
    [0, 0],
    [0, 0, 1],
    [0, 0, 1, 1],
    [1, 1, 1, 1, 1],
]
# Adaptive threshold mu = 0.5: floor(0.5 * 15) = 7 entries kept; the cut
# lands at 0.3117, dropping the 0.1344 cell relative to the single rule.
GAMMA6_ADAPTIVE_05_ROWS = [
    [0],
    [0, 0],
    [0, 0, 1],
    [0, 0, 1, 0],
    [1, 1, 1, 1, 1],
]
LAMBDA6_MU_05_CUT = 0.3117


def strict_lower_pattern(rows):
    """Boolean d x d pattern from strictly-lower-triangular 0/1 rows."""
    d = len(rows) + 1
    out = np.zeros((d, d), dtype=bool)
    for r, row in enumerate(rows, start=1):
        out[r, : len(row)] = np.asarray(row, dtype=bool)
    return out
