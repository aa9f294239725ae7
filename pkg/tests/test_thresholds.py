"""Thresholding an entry-penalty matrix into independence patterns."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsevine import (ContractError, ThresholdSpec, adaptive_threshold,
                        apply_threshold, default_threshold_grid,
                        path_threshold_grid, single_threshold)

from reference_fixtures import (GAMMA6_ADAPTIVE_05_ROWS,
                                GAMMA6_SINGLE_01_ROWS, LAMBDA6,
                                LAMBDA6_MU_05_CUT, strict_lower_pattern)


class TestGoldenPatterns:
    def test_single_threshold_01(self):
        pattern = single_threshold(LAMBDA6, 0.1)
        want = strict_lower_pattern(GAMMA6_SINGLE_01_ROWS)
        assert np.array_equal(pattern.values, want)
        assert pattern.count_true() == 8

    def test_adaptive_threshold_half(self):
        pattern, cut = adaptive_threshold(LAMBDA6, 0.5)
        want = strict_lower_pattern(GAMMA6_ADAPTIVE_05_ROWS)
        assert np.array_equal(pattern.values, want)
        assert pattern.count_true() == 7
        assert cut == pytest.approx(LAMBDA6_MU_05_CUT)

    def test_the_two_rules_differ_by_one_cell(self):
        single = single_threshold(LAMBDA6, 0.1).values
        adaptive = adaptive_threshold(LAMBDA6, 0.5)[0].values
        diff = np.argwhere(single != adaptive)
        assert [tuple(x) for x in diff] == [(4, 3)]
        assert LAMBDA6[4, 3] == pytest.approx(0.1344)


class TestSingleThreshold:
    def test_infinite_entries_always_survive(self):
        lam = np.zeros((3, 3))
        lam[2, 0] = np.inf
        lam[1, 0] = 0.2
        pattern = single_threshold(lam, 0.9)
        assert pattern.values[2, 0]
        assert not pattern.values[1, 0]

    def test_zero_entries_never_survive(self):
        lam = np.zeros((3, 3))
        pattern = single_threshold(lam, 1e-12)
        assert pattern.count_true() == 0

    def test_positive_threshold_required(self):
        with pytest.raises(ContractError):
            single_threshold(LAMBDA6, 0.0)
        with pytest.raises(ContractError):
            single_threshold(LAMBDA6, -0.5)


class TestAdaptiveThreshold:
    def test_nominal_count_zero_gives_empty_pattern(self):
        pattern, cut = adaptive_threshold(LAMBDA6, 0.01)
        assert pattern.count_true() == 0
        assert cut == np.inf

    def test_mu_one_keeps_every_positive_entry(self):
        pattern, _ = adaptive_threshold(LAMBDA6, 1.0)
        assert pattern.count_true() == 15

    def test_ties_at_the_cut_are_all_kept(self):
        lam = np.zeros((4, 4))
        lam[1, 0] = lam[2, 0] = lam[3, 0] = 0.5
        lam[2, 1] = 0.9
        # floor(0.4 * 6) = 2 nominal, but the cut value 0.5 is shared by
        # three cells, so all of them stay.
        pattern, cut = adaptive_threshold(lam, 0.4)
        assert cut == 0.5
        assert pattern.count_true() == 4

    def test_mu_out_of_range_rejected(self):
        for mu in (0.0, -0.2, 1.5):
            with pytest.raises(ContractError):
                adaptive_threshold(LAMBDA6, mu)


class TestGrids:
    def test_default_grid_is_the_quartic_sweep(self):
        grid = default_threshold_grid()
        assert grid == tuple((j / 20) ** 4 for j in range(1, 11))
        assert grid[0] == pytest.approx(0.05**4)
        assert grid[-1] == pytest.approx(0.5**4)

    def test_path_grid_lists_distinct_positive_entries(self):
        grid = path_threshold_grid(LAMBDA6)
        lower = LAMBDA6[np.tril_indices_from(LAMBDA6, -1)]
        assert set(grid) == set(lower[lower > 0])
        assert list(grid) == sorted(grid)

    def test_path_grid_enumerates_every_pattern(self):
        grid = path_threshold_grid(LAMBDA6)
        counts = [single_threshold(LAMBDA6, t).count_true() for t in grid]
        assert counts == list(range(15, 0, -1))
        # Every adaptive pattern appears among the single-threshold sweeps.
        sweeps = {single_threshold(LAMBDA6, t).values.tobytes() for t in grid}
        for mu in (0.1, 0.25, 0.5, 0.75, 1.0):
            pattern, _ = adaptive_threshold(LAMBDA6, mu)
            if pattern.count_true():
                assert pattern.values.tobytes() in sweeps

    def test_path_grid_skips_zero_and_infinite_entries(self):
        lam = np.zeros((3, 3))
        lam[2, 0] = np.inf
        lam[2, 1] = 0.3
        assert path_threshold_grid(lam) == (0.3,)


class TestDispatch:
    def test_apply_threshold_routes_both_modes(self):
        p1, cut1 = apply_threshold(LAMBDA6, ThresholdSpec("single", 0.1))
        assert cut1 == 0.1
        assert np.array_equal(p1.values, single_threshold(LAMBDA6, 0.1).values)
        p2, cut2 = apply_threshold(LAMBDA6, ThresholdSpec("adaptive", 0.5))
        assert cut2 == pytest.approx(LAMBDA6_MU_05_CUT)
        assert p2.count_true() == 7

    def test_spec_validation(self):
        with pytest.raises(ContractError):
            ThresholdSpec("both", 0.1)
        with pytest.raises(ContractError):
            ThresholdSpec("single", 0.0)
        with pytest.raises(ContractError):
            ThresholdSpec("adaptive", 0.0)


@st.composite
def penalty_matrices(draw):
    d = draw(st.integers(min_value=3, max_value=8))
    cells = d * (d - 1) // 2
    values = draw(st.lists(
        st.one_of(st.just(0.0),
                  st.floats(1e-6, 1.0, allow_nan=False)),
        min_size=cells, max_size=cells))
    lam = np.zeros((d, d))
    lam[np.tril_indices(d, -1)] = values
    return lam


class TestNestedness:
    @settings(max_examples=60, deadline=None)
    @given(penalty_matrices(),
           st.floats(1e-6, 1.2), st.floats(1e-6, 1.2))
    def test_single_patterns_nest_with_the_threshold(self, lam, t1, t2):
        lo, hi = sorted((t1, t2))
        keep_lo = single_threshold(lam, lo).values
        keep_hi = single_threshold(lam, hi).values
        assert not np.any(keep_hi & ~keep_lo)

    @settings(max_examples=60, deadline=None)
    @given(penalty_matrices(),
           st.floats(0.05, 1.0), st.floats(0.05, 1.0))
    def test_adaptive_patterns_nest_with_mu(self, lam, m1, m2):
        lo, hi = sorted((m1, m2))
        keep_lo = adaptive_threshold(lam, lo)[0].values
        keep_hi = adaptive_threshold(lam, hi)[0].values
        assert not np.any(keep_lo & ~keep_hi)
