"""Dataset container, CSV loading, and scale transformations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy import stats

from sparsevine import (ContractError, DataError, Dataset, ParseError, Scale,
                        load_csv, to_pseudo_observations, to_u_scale,
                        to_z_scale)


def make_x(n=40, d=3, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(rng.normal(size=(n, d)), Scale.X)


class TestDataset:
    def test_shape_and_accessors(self):
        ds = make_x(25, 4)
        assert (ds.n, ds.d) == (25, 4)
        assert ds.column(2).shape == (25,)

    def test_rejects_bad_shapes_and_values(self):
        with pytest.raises(DataError):
            Dataset(np.ones(5), Scale.X)
        with pytest.raises(DataError):
            Dataset(np.ones((1, 3)), Scale.X)
        with pytest.raises(DataError):
            Dataset(np.array([[1.0, np.nan], [0.5, 2.0]]), Scale.X)

    def test_u_scale_bounds_enforced(self):
        with pytest.raises(DataError):
            Dataset(np.array([[0.0, 0.5], [0.5, 0.5]]), Scale.U)
        Dataset(np.array([[0.01, 0.5], [0.5, 0.99]]), Scale.U)

    def test_column_names_length_checked(self):
        with pytest.raises(DataError):
            Dataset(np.ones((3, 2)) * 0.5, Scale.U, column_names=("a",))

    def test_values_are_read_only(self):
        ds = make_x()
        with pytest.raises(ValueError):
            ds.values[0, 0] = 9.9


class TestCsv:
    def test_header_auto_detection(self, tmp_path):
        p = tmp_path / "with_header.csv"
        p.write_text("a,b,c\n1,2,3\n4,5,6\n7,8,9\n")
        ds = load_csv(p)
        assert ds.column_names == ("a", "b", "c")
        assert ds.values.shape == (3, 3)

        q = tmp_path / "plain.csv"
        q.write_text("1,2\n3,4\n")
        ds = load_csv(q)
        assert ds.column_names == ("V1", "V2")  # generated when headerless
        assert np.array_equal(ds.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_parse_error_reports_position(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(ParseError):
            load_csv(p)

    def test_missing_and_empty_files(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(DataError):
            load_csv(p)

    def test_ragged_rows_rejected(self, tmp_path):
        p = tmp_path / "ragged.csv"
        p.write_text("1,2,3\n4,5\n")
        with pytest.raises((DataError, ParseError)):
            load_csv(p)


class TestScaleTransforms:
    def test_pseudo_observations_match_rank_formula(self):
        ds = make_x(60, 3, seed=4)
        u = to_pseudo_observations(ds)
        assert u.scale is Scale.U
        for j in range(ds.d):
            ranks = stats.rankdata(ds.values[:, j])
            assert np.allclose(u.values[:, j], ranks / (ds.n + 1))

    def test_z_round_trip(self):
        ds = make_x(80, 2, seed=7)
        u = to_pseudo_observations(ds)
        z = to_z_scale(u)
        assert z.scale is Scale.Z
        back = to_u_scale(z)
        assert np.allclose(back.values, u.values, atol=1e-12)

    def test_scale_tags_enforced(self):
        u = Dataset(np.full((5, 2), 0.5), Scale.U)
        with pytest.raises(ContractError):
            to_pseudo_observations(u)
        with pytest.raises(ContractError):
            to_u_scale(u)
        x = make_x()
        with pytest.raises(ContractError):
            to_z_scale(x)

    def test_ties_rejected_for_pseudo_observations(self):
        vals = np.ones((10, 2))
        vals[:, 1] = np.arange(10)
        with pytest.raises(DataError):
            to_pseudo_observations(Dataset(vals, Scale.X))

    @settings(max_examples=30, deadline=None)
    @given(hnp.arrays(np.float64, (20, 2),
                      elements=st.floats(-50, 50, allow_nan=False)),
           st.sampled_from([np.exp, np.arctan, lambda v: 3 * v - 1]))
    def test_pseudo_observations_invariant_to_monotone_maps(self, vals, fn):
        # Ranks are what matter: any strictly increasing transform of a
        # column leaves the pseudo-observations unchanged.
        base = np.asarray(vals) + np.arange(20)[:, None] * 1e-6  # break ties
        ds = Dataset(base, Scale.X)
        mapped = Dataset(fn(base), Scale.X)
        assert np.allclose(to_pseudo_observations(ds).values,
                           to_pseudo_observations(mapped).values)
