from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegend.errors import ConfigError, DataError
from eegend.features import (
    FEATURES_PER_CHANNEL, FeatureCache, FeatureMatrix, apply_mask, apply_standardizer,
    channel_features, chi2_statistic, chi_square_scores, chi_square_select, component_names,
    equal_frequency_bins, extract_features, fit_standardizer, stat_features,
)

EXPECTED_LENGTHS = {"EMD": (12, 24, 36), "DWT": (16, 32, 48), "SLBP": (31, 62, 93)}


def _fm(X, y):
    X = np.asarray(X, dtype=float)
    return FeatureMatrix(X, [f"f{j}" for j in range(X.shape[1])], y)


def test_stat_features_examples():
    np.testing.assert_array_equal(stat_features([0, 0, 0, 0]), [0, 0, 0, 0])
    np.testing.assert_allclose(stat_features([1, -1, 1, -1]), [2.0, 0.0, 1.0, 4.0], atol=1e-15)
    np.testing.assert_array_equal(stat_features([3.0]), [0.0, 3.0, 0.0, 9.0])
    with pytest.raises(DataError):
        stat_features([])


def test_stat_entropy_scale_invariant(rng):
    x = rng.standard_normal(100)
    assert stat_features(x)[0] == pytest.approx(stat_features(-7 * x)[0], abs=1e-12)
    assert 0 <= stat_features(x)[0] <= np.log2(100)


@pytest.mark.parametrize("extractor", ["EMD", "DWT", "SLBP"])
def test_feature_lengths(planted_ds, extractor):
    segs = planted_ds.segments[:2]
    for n, expected in zip((1, 2, 3), EXPECTED_LENGTHS[extractor]):
        fm = extract_features(segs, list(range(n)), extractor, planted_ds.channels)
        assert fm.X.shape == (2, expected)
        assert len(fm.names) == expected == n * FEATURES_PER_CHANNEL[extractor]
        assert len(set(fm.names)) == expected


def test_feature_names(planted_ds):
    fm = extract_features(planted_ds.segments[:1], [2, 0], "DWT", planted_ds.channels)
    assert fm.names[0] == "Pz/DWT/cA3/entropy"
    assert fm.names[16] == "Fz/DWT/cA3/entropy"
    assert fm.names[15] == "Pz/DWT/cD1/energy"
    assert component_names("SLBP")[30] == "code/30"
    assert component_names("emd")[0] == "IMF1/entropy"


def test_channel_block_order(planted_ds):
    seg = planted_ds.segments[0]
    fm = extract_features([seg], [5, 1], "SLBP")
    np.testing.assert_array_equal(fm.X[0, :31], channel_features(seg.data[:, 5], "SLBP"))
    np.testing.assert_array_equal(fm.X[0, 31:], channel_features(seg.data[:, 1], "SLBP"))


def test_cache_and_workers_agree(planted_ds):
    segs = planted_ds.segments[:6]
    cache = FeatureCache("DWT")
    a = extract_features(segs, [0, 3], "DWT", cache=cache)
    assert len(cache) == 12
    b = extract_features(segs, [0, 3], "DWT", cache=cache, workers=3)
    c = extract_features(segs, [0, 3], "DWT")
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.X, c.X)
    with pytest.raises(ConfigError):
        extract_features(segs, [0], "SLBP", cache=cache)


def test_extract_errors(planted_ds):
    segs = planted_ds.segments[:1]
    with pytest.raises(ConfigError):
        extract_features(segs, [], "DWT")
    with pytest.raises(ConfigError):
        extract_features(segs, [19], "DWT")
    with pytest.raises(ConfigError):
        extract_features(segs, [0], "FFT")
    with pytest.raises(DataError):
        extract_features([], [0], "DWT")


def test_feature_matrix_validation():
    with pytest.raises(DataError):
        FeatureMatrix(np.zeros((2, 2)), ["a"], [0, 1])
    with pytest.raises(DataError):
        FeatureMatrix(np.array([[np.nan]]), ["a"], [0])
    with pytest.raises(DataError):
        FeatureMatrix(np.zeros((2, 1)), ["a"], [0])


def test_feature_csv(tmp_path):
    fm = _fm([[1.5, 2.0], [3.0, 4.25]], [1, 0])
    fm.to_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines == ["f0,f1,label", "1.5,2.0,ADHD", "3.0,4.25,HC"]


# -- standardizer ------------------------------------------------------------

def test_standardizer_two_points():
    s = fit_standardizer(_fm([[2.0], [4.0]], [0, 1]))
    np.testing.assert_array_equal(s.transform(_fm([[2.0], [4.0]], [0, 1])).X, [[-1.0], [1.0]])


def test_standardizer_degenerate():
    m = _fm([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]], [0, 1, 0])
    s = fit_standardizer(m)
    assert s.degenerate.tolist() == [True, False]
    np.testing.assert_array_equal(apply_standardizer(s, m).X[:, 0], 0.0)


def test_standardizer_moments(rng):
    m = _fm(rng.normal(3, 5, (100, 10)), rng.integers(0, 2, 100))
    z = fit_standardizer(m).transform(m).X
    assert np.abs(z.mean(axis=0)).max() <= 1e-10
    np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)


def test_standardizer_uses_train_only(rng):
    train = _fm(rng.normal(size=(20, 3)), [0, 1] * 10)
    s = fit_standardizer(train)
    test = _fm(rng.normal(size=(5, 3)) + 100, [0] * 5)
    np.testing.assert_allclose(s.transform(test).X, (test.X - train.X.mean(0)) / train.X.std(0))
    other = FeatureMatrix(test.X, ["x", "y", "z"], test.y)
    with pytest.raises(DataError):
        s.transform(other)


# -- chi-square --------------------------------------------------------------

def test_chi2_hand_case():
    assert chi2_statistic([[30, 10], [10, 30]]) == 20.0


def test_chi2_independent_table():
    assert chi2_statistic([[10, 10], [25, 25], [5, 5]]) == 0.0
    assert chi2_statistic([[0, 0], [0, 0]]) == 0.0


def test_chi2_matches_scipy(rng):
    stats = pytest.importorskip("scipy.stats")
    for _ in range(20):
        t = rng.integers(1, 40, (6, 2))
        ref = stats.chi2_contingency(t, correction=False)[0]
        assert chi2_statistic(t) == pytest.approx(ref, rel=1e-12)


def test_equal_frequency_bins():
    b = equal_frequency_bins(np.arange(100.0), 10)
    assert np.bincount(b).tolist() == [10] * 10
    b = equal_frequency_bins(np.r_[np.zeros(50), np.arange(50.0)], 10)
    assert b[0] == b[49] == b[50]


def test_zero_dependence_feature():
    x = np.repeat(np.arange(10.0), 4)
    y = np.tile([0, 1], 20)
    assert chi_square_scores(_fm(x[:, None], y))[0] == 0.0


def test_separating_feature_ranks_first(rng):
    y = np.repeat([0, 1], 50)
    noise = rng.normal(size=(100, 4))
    sep = np.where(y == 1, 10.0, 0.0) + rng.normal(size=100) * 0.1
    X = np.column_stack([noise[:, :2], sep, noise[:, 2:]])
    mask = chi_square_select(_fm(X, y), keep_fraction=0.2)
    assert mask.kept_indices == (2,)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_transform_invariance(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(80)
    y = (x + rng.standard_normal(80) > 0).astype(int)
    transforms = [np.exp(x), x ** 3, 5 * x - 2, np.arctan(x)]
    base = chi_square_scores(_fm(x[:, None], y))[0]
    for tx in transforms:
        assert chi_square_scores(_fm(tx[:, None], y))[0] == base


def test_keep_count_and_ties():
    y = np.repeat([0, 1], 10)
    X = np.tile(np.arange(20.0)[:, None], (1, 5))       # five identical columns
    mask = chi_square_select(_fm(X, y), keep_fraction=0.5)
    assert mask.kept_indices == (0, 1, 2)                # ceil(2.5) = 3, lowest indices
    assert chi_square_select(_fm(X, y), keep_fraction=1.0).kept_indices == (0, 1, 2, 3, 4)
    assert chi_square_select(_fm(X, y), keep_fraction=0.2).kept_indices == (0,)


def test_mask_apply():
    y = np.array([0, 1, 0, 1])
    train = _fm(np.arange(12.0).reshape(4, 3), y)
    mask = chi_square_select(train, n_bins=2, keep_fraction=1.0)
    assert apply_mask(mask, train).X.shape == (4, 3)
    m2 = replace(mask, kept_indices=(0, 2))
    test = _fm(np.arange(6.0).reshape(2, 3) + 50, [0, 1])
    out = m2.apply(test)
    np.testing.assert_array_equal(out.X, test.X[:, [0, 2]])
    assert out.names == ("f0", "f2")


def test_select_errors():
    m = _fm(np.zeros((4, 2)), [0, 0, 0, 0])
    with pytest.raises(DataError):
        chi_square_select(m)
    m = _fm(np.zeros((4, 2)), [0, 1, 0, 1])
    with pytest.raises(ConfigError):
        chi_square_select(m, keep_fraction=0)
    with pytest.raises(ConfigError):
        chi_square_select(m, n_bins=1)
