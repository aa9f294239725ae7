"""Structure-matrix tests: golden fixtures, validation, construction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsevine import (Edge, IndependencePattern, RVineMatrix,
                        StructureError, allowed_entries, blacklist,
                        candidate_pool, edges_of_tree, matrix_from_first_tree,
                        matrix_from_trees, validate)
from sparsevine.rvine import (kappa_of, regressor_sets, rows_to_triangle,
                              triangle_to_rows)

from reference_fixtures import (DISSMANN6_ROWS, LASSO6_ROWS, M6, M6_EDGES,
                                M6_ETA, M6_GAMMA_ROWS, M6_KAPPA, M6_RSETS,
                                PARTIAL6, PARTIAL6_ALLOWED, PARTIAL6_BLACKLIST,
                                PARTIAL6_CELL, lower_triangular,
                                strict_lower_pattern)


def edge_key(edge):
    return tuple(edge.conditioned), frozenset(edge.conditioning)


class TestGoldenMatrix:
    def test_m6_is_valid(self):
        assert validate(RVineMatrix(M6)).ok

    def test_m6_edges_per_tree(self):
        matrix = RVineMatrix(M6)
        for t, expected in M6_EDGES.items():
            got = [edge_key(e) for e in edges_of_tree(matrix, t)]
            want = [(pair, frozenset(cond)) for pair, cond in expected]
            assert got == want, f"tree {t}"

    def test_m6_eta_and_diagonal(self):
        matrix = RVineMatrix(M6)
        assert matrix.eta == M6_ETA
        assert matrix.diagonal == tuple(reversed(M6_ETA))

    def test_m6_kappa_table(self):
        matrix = RVineMatrix(M6)
        for j, regressors in M6_KAPPA.items():
            got = tuple(kappa_of(matrix, j, i)
                        for i in range(1, len(regressors) + 1))
            assert got == regressors, f"equation {j}"

    def test_m6_regressor_splits(self):
        matrix = RVineMatrix(M6)
        pattern = IndependencePattern(strict_lower_pattern(M6_GAMMA_ROWS))
        r1, r0 = regressor_sets(matrix, pattern)
        for j, eta_j in enumerate(M6_ETA, start=1):
            full, active, inactive = M6_RSETS[eta_j]
            assert M6_KAPPA[j] == full
            assert r1[j - 1] == active, f"variable {eta_j}"
            assert r0[j - 1] == inactive, f"variable {eta_j}"

    def test_both_published_completions_are_valid(self):
        assert validate(RVineMatrix(lower_triangular(LASSO6_ROWS))).ok
        assert validate(RVineMatrix(lower_triangular(DISSMANN6_ROWS))).ok


class TestPartialMatrixBookkeeping:
    def test_allowed_and_blacklist(self):
        matrix = RVineMatrix(PARTIAL6)
        row, col = PARTIAL6_CELL
        assert allowed_entries(matrix, row, col) == PARTIAL6_ALLOWED
        assert blacklist(matrix, row, col) == PARTIAL6_BLACKLIST
        assert candidate_pool(matrix, row, col) == (
            PARTIAL6_ALLOWED | PARTIAL6_BLACKLIST)

    def test_unfilled_column_is_rejected(self):
        matrix = RVineMatrix(PARTIAL6)
        with pytest.raises(Exception):
            allowed_entries(matrix, 3, 0)  # row below (4,0) is open


class TestValidation:
    def test_duplicate_in_column_fails(self):
        bad = M6.copy()
        bad[2, 0] = 5  # 5 already sits at (5, 0)
        report = validate(RVineMatrix(bad), full_report=True)
        assert not report.ok

    def test_proximity_violation_fails(self):
        # Hand-built d=4 matrix: properties (i) and (ii) hold, but the
        # tree-2 edge of column 0 conditions on a pair that tree 1 never
        # connects, so the proximity property must flag it.
        bad = lower_triangular([[4], [2, 3], [3, 1, 2], [1, 2, 1, 1]])
        report = validate(RVineMatrix(bad))
        assert not report.ok

    def test_valid_d4_passes(self):
        good = lower_triangular([[4], [3, 3], [2, 1, 2], [1, 2, 1, 1]])
        assert validate(RVineMatrix(good)).ok

    def test_constructor_guards(self):
        with pytest.raises(StructureError):
            RVineMatrix(np.zeros((3, 4), dtype=int))
        with pytest.raises(StructureError):
            RVineMatrix(np.triu(np.ones((4, 4), dtype=int)))
        too_big = np.zeros((3, 3), dtype=int)
        too_big[2, 0] = 7
        with pytest.raises(StructureError):
            RVineMatrix(too_big)


class TestConstruction:
    def test_matrix_from_trees_round_trip(self):
        trees = {t: [(pair, frozenset(c)) for pair, c in edges]
                 for t, edges in M6_EDGES.items()}
        rebuilt = matrix_from_trees(
            [[Edge(pair, frozenset(cond)) for pair, cond in edges]
             for edges in M6_EDGES.values()])
        assert validate(rebuilt).ok
        for t in trees:
            got = {(frozenset(e.conditioned), frozenset(e.conditioning))
                   for e in edges_of_tree(rebuilt, t)}
            want = {(frozenset(pair), cond) for pair, cond in trees[t]}
            assert got == want, f"tree {t}"

    def test_matrix_from_first_tree_star_and_path(self):
        star = matrix_from_first_tree(5, [(1, 2), (1, 3), (1, 4), (1, 5)])
        assert validate(star).ok
        tree1 = {frozenset(e.conditioned) for e in edges_of_tree(star, 1)}
        assert tree1 == {frozenset(p) for p in [(1, 2), (1, 3), (1, 4), (1, 5)]}

        chain = matrix_from_first_tree(5, [(1, 2), (2, 3), (3, 4), (4, 5)])
        assert validate(chain).ok
        tree1 = {frozenset(e.conditioned) for e in edges_of_tree(chain, 1)}
        assert tree1 == {frozenset(p) for p in [(1, 2), (2, 3), (3, 4), (4, 5)]}

    def test_matrix_from_first_tree_rejects_non_tree(self):
        with pytest.raises(StructureError):
            matrix_from_first_tree(4, [(1, 2), (2, 3), (1, 3)])
        with pytest.raises(StructureError):
            matrix_from_first_tree(4, [(1, 2), (3, 4), (1, 2)])


@st.composite
def random_tree(draw):
    d = draw(st.integers(min_value=3, max_value=9))
    # Random attachment: vertex k joins an earlier vertex, yielding a tree.
    edges = [(draw(st.integers(min_value=1, max_value=k - 1)), k)
             for k in range(2, d + 1)]
    return d, edges


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(random_tree())
    def test_first_tree_embedding_always_validates(self, tree):
        d, edges = tree
        matrix = matrix_from_first_tree(d, edges)
        assert validate(matrix).ok
        tree1 = {frozenset(e.conditioned) for e in edges_of_tree(matrix, 1)}
        assert tree1 == {frozenset(e) for e in edges}

    @settings(max_examples=40, deadline=None)
    @given(random_tree(), st.randoms(use_true_random=False))
    def test_relabeling_preserves_validity(self, tree, rng):
        d, edges = tree
        labels = list(range(1, d + 1))
        rng.shuffle(labels)
        relabeled = [(labels[a - 1], labels[b - 1]) for a, b in edges]
        matrix = matrix_from_first_tree(d, relabeled)
        assert validate(matrix).ok


class TestTriangleSerialization:
    def test_round_trip(self):
        rows = triangle_to_rows(M6)
        back = rows_to_triangle(rows, dtype=int)
        assert np.array_equal(back, M6)

    def test_ragged_rows_rejected(self):
        with pytest.raises(Exception):
            rows_to_triangle([[1], [2, 3, 4]])
