import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from chfnet.dataset import (Dataset, compute_stats, fit_standardizer, inverse_transform, read_csv, split,
                            split_from_manifest, train_size, transform, write_csv)
from chfnet.errors import ValidationError
from chfnet.lut import flatten
from chfnet.sample import full_synthetic_grid


def make_ds(X, y=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.arange(len(X), dtype=float) if y is None else y
    return Dataset(X, y, [f"f{i}" for i in range(X.shape[1])])


class TestStats:
    def test_two_points(self):
        st_ = compute_stats(make_ds([1.0, 3.0]))["f0"]
        assert (st_.mean, st_.sd, st_.cv, st_.min, st_.max) == (2.0, 1.0, 0.5, 1.0, 3.0)

    def test_constant_column(self):
        st_ = compute_stats(make_ds([4.0, 4.0, 4.0]))["f0"]
        assert st_.sd == 0 and st_.min == st_.max == st_.mean == 4.0

    def test_zero_mean_cv_absent(self):
        assert compute_stats(make_ds([-1.0, 1.0]))["f0"].cv is None

    def test_target_included(self):
        stats = compute_stats(make_ds([1.0, 2.0], y=np.array([10.0, 30.0])))
        assert stats["chf_kw_m2"].mean == 20.0


class TestStandardizer:
    def test_two_points(self):
        s = fit_standardizer(make_ds([1.0, 3.0]))
        assert s.means.tolist() == [2.0] and s.stds.tolist() == [1.0]

    def test_constant_column_named(self):
        ds = Dataset(np.array([[1.0, 5.0], [2.0, 5.0]]), [0, 0], ["p", "flat"])
        with pytest.raises(ValidationError, match="flat"):
            fit_standardizer(ds)

    def test_fitting_set_standardized(self):
        rng = np.random.default_rng(0)
        ds = make_ds(rng.normal(5, 3, size=(200, 3)))
        out = transform(fit_standardizer(ds), ds)
        np.testing.assert_allclose(out.features.mean(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(out.features.std(axis=0), 1, atol=1e-9)

    def test_mean_row_maps_to_zero(self):
        ds = make_ds(np.array([[1.0, 10.0], [3.0, 30.0]]))
        s = fit_standardizer(ds)
        np.testing.assert_array_equal(transform(s, make_ds(s.means[None, :])).features, [[0.0, 0.0]])

    def test_dimension_mismatch(self):
        s = fit_standardizer(make_ds([1.0, 3.0]))
        with pytest.raises(ValidationError, match="features"):
            transform(s, make_ds(np.ones((2, 2))))

    @given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 4)),
                  elements=st.floats(-1e4, 1e4, allow_nan=False)))
    def test_roundtrip(self, X):
        if np.any(X.std(axis=0) < 1e-3):
            return
        ds = make_ds(X)
        s = fit_standardizer(ds)
        back = inverse_transform(s, transform(s, ds)).features
        scale = np.maximum(np.abs(X), np.abs(s.means) + s.stds)
        assert np.all(np.abs(back - X) <= 1e-10 * scale)

    def test_full_grid_training_split_near_reference_means(self):
        ds = flatten(full_synthetic_grid())
        s = fit_standardizer(split(ds, 0.8, 0).train)
        for got, ref in zip(s.means, (8.660, 3295.238, 0.220)):
            assert abs(got - ref) / ref < 0.03


class TestSplit:
    def test_sizes(self):
        sp = split(make_ds(np.arange(10.0)), 0.8, 1)
        assert (len(sp.train), len(sp.test)) == (8, 2)

    @pytest.mark.parametrize("n,frac,expected", [(7245, 0.8, 5796), (7225, 0.8, 5780), (5, 0.5, 3), (3, 0.5, 2)])
    def test_round_half_up(self, n, frac, expected):
        assert train_size(n, frac) == expected

    def test_deterministic(self):
        ds = make_ds(np.arange(100.0))
        a, b = split(ds, 0.8, 42), split(ds, 0.8, 42)
        np.testing.assert_array_equal(a.train_indices, b.train_indices)

    def test_seed_changes_membership(self):
        ds = make_ds(np.arange(1000.0))
        a, b = split(ds, 0.8, 1), split(ds, 0.8, 2)
        assert set(a.train_indices) != set(b.train_indices)

    @pytest.mark.parametrize("frac", [0.0, 1.0, -0.2, 1.5])
    def test_bad_fraction(self, frac):
        with pytest.raises(ValidationError):
            split(make_ds(np.arange(10.0)), frac, 0)

    def test_too_small(self):
        with pytest.raises(ValidationError, match="too small"):
            split(make_ds(np.arange(2.0)), 0.9, 0)

    @given(st.integers(2, 300), st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
    def test_partition(self, n, seed, frac):
        ds = make_ds(np.arange(n, dtype=float))
        try:
            sp = split(ds, frac, seed)
        except ValidationError:
            assert train_size(n, frac) in (0, n)
            return
        assert len(sp.train) == train_size(n, frac)
        assert not set(sp.train_indices) & set(sp.test_indices)
        merged = np.sort(np.concatenate([sp.train.targets, sp.test.targets]))
        np.testing.assert_array_equal(merged, ds.targets)

    def test_manifest_roundtrip(self, tmp_path):
        ds = make_ds(np.arange(20.0))
        sp = split(ds, 0.8, 5)
        sp.write_manifest(tmp_path / "m.json")
        again = split_from_manifest(ds, json.loads((tmp_path / "m.json").read_text()))
        np.testing.assert_array_equal(again.test.targets, sp.test.targets)


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    ds = Dataset(rng.normal(size=(5, 4)), rng.normal(size=5),
                 ["pressure_mpa", "mass_flux_kg_m2s", "quality", "aug_1"])
    write_csv(ds, tmp_path / "d.csv")
    again = read_csv(tmp_path / "d.csv")
    assert again.feature_names == ds.feature_names
    np.testing.assert_array_equal(again.features, ds.features)
    np.testing.assert_array_equal(again.targets, ds.targets)


def test_dataset_rejects_nan():
    with pytest.raises(ValidationError):
        Dataset([[np.nan]], [1.0], ["a"])
