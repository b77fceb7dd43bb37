import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specclass.errors import DataError
from specclass.raster import ClassInfo, LabelMask, Raster
from specclass.sampling import (TrainingSet, read_training_csv, split_train_eval,
                                stratified_sample)


@pytest.fixture
def scene(three_class_mask, rng):
    return Raster(rng.random((2, 30, 10))), three_class_mask


def test_per_class_counts(scene):
    raster, mask = scene
    ts = stratified_sample(mask, raster, 10, seed=1)
    assert len(ts) == 30
    assert ts.per_class_counts == {1: 10, 2: 10, 3: 10}


def test_insufficient_stratum_names_class(scene):
    raster, _ = scene
    labels = np.zeros((30, 10), np.uint32)
    labels[0, :5] = 2
    labels[1:] = 1
    mask = LabelMask(labels, {1: ClassInfo("Trees"), 2: ClassInfo("Soil")})
    with pytest.raises(DataError, match=r"class 2 \(Soil\)"):
        stratified_sample(mask, raster, 10, seed=0)


def test_deterministic_per_seed(scene):
    raster, mask = scene
    a = stratified_sample(mask, raster, 10, seed=5)
    b = stratified_sample(mask, raster, 10, seed=5)
    c = stratified_sample(mask, raster, 10, seed=6)
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)
    assert np.array_equal(a.features, b.features)
    assert not (np.array_equal(a.rows, c.rows) and np.array_equal(a.cols, c.cols))
    assert c.per_class_counts == a.per_class_counts


def test_frozen_selection():
    # pins the PRNG stream contract: partial Fisher-Yates over row-major strata
    labels = np.array([[1, 1, 2, 2], [1, 1, 2, 2], [1, 2, 2, 1]], np.uint32)
    mask = LabelMask(labels, {1: ClassInfo("a"), 2: ClassInfo("b")})
    raster = Raster(np.arange(12, dtype=float).reshape(1, 3, 4))
    ts = stratified_sample(mask, raster, 3, seed=42)
    got = list(zip(ts.rows.tolist(), ts.cols.tolist(), ts.class_ids.tolist()))
    assert got == [(0, 1, 1), (1, 0, 1), (2, 0, 1), (0, 2, 2), (0, 3, 2), (2, 1, 2)]

    # independent re-derivation from raw SplitMix64 outputs
    state, outputs = 42, []

    def nxt():
        nonlocal state
        state = (state + 0x9E3779B97F4A7C15) % 2**64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % 2**64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % 2**64
        return z ^ (z >> 31)

    def below(n):
        while True:
            x = nxt()
            if x < 2**64 - 2**64 % n:
                return x % n

    expected = []
    for k, stratum in ((1, [0, 1, 4, 5, 8, 11]), (2, [2, 3, 6, 7, 9, 10])):
        for i in range(3):
            j = i + below(len(stratum) - i)
            stratum[i], stratum[j] = stratum[j], stratum[i]
            expected.append((stratum[i] // 4, stratum[i] % 4, k))
    assert got == expected


def test_labels_and_features_match_mask(scene):
    raster, mask = scene
    ts = stratified_sample(mask, raster, 7, seed=3)
    for r, c, k, f in zip(ts.rows, ts.cols, ts.class_ids, ts.features):
        assert mask.labels[r, c] == k
        np.testing.assert_array_equal(f, raster.data[:, r, c])


def test_thread_count_does_not_matter(scene, monkeypatch):
    raster, mask = scene
    monkeypatch.setenv("SPECCLASS_THREADS", "1")
    a = stratified_sample(mask, raster, 9, seed=2)
    monkeypatch.setenv("SPECCLASS_THREADS", "8")
    b = stratified_sample(mask, raster, 9, seed=2)
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)


def test_unique_coordinates_enforced():
    with pytest.raises(DataError, match="duplicated"):
        TrainingSet(np.array([0, 0]), np.array([1, 1]), np.array([1, 1]), np.zeros((2, 1)))
    with pytest.raises(DataError, match="nonzero"):
        TrainingSet(np.array([0]), np.array([1]), np.array([0]), np.zeros((1, 1)))


class TestSplit:
    def test_rounding(self, scene):
        raster, mask = scene
        train, ev = split_train_eval(stratified_sample(mask, raster, 10, 1), 0.7, 1)
        assert train.per_class_counts == {1: 7, 2: 7, 3: 7}
        assert ev.per_class_counts == {1: 3, 2: 3, 3: 3}

    def test_minimum_case(self, scene):
        raster, mask = scene
        train, ev = split_train_eval(stratified_sample(mask, raster, 2, 1), 0.5, 1)
        assert train.per_class_counts == ev.per_class_counts == {1: 1, 2: 1, 3: 1}

    def test_extreme_fraction_keeps_one_each_side(self, scene):
        raster, mask = scene
        train, ev = split_train_eval(stratified_sample(mask, raster, 4, 1), 0.01, 1)
        assert train.per_class_counts == {1: 1, 2: 1, 3: 1}
        assert ev.per_class_counts == {1: 3, 2: 3, 3: 3}

    def test_too_small_class(self, scene):
        raster, mask = scene
        with pytest.raises(DataError):
            split_train_eval(stratified_sample(mask, raster, 1, 1), 0.5, 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 40), st.floats(0.05, 0.95), st.integers(0, 2**63))
    def test_partition(self, per_class, fraction, seed):
        labels = np.repeat(np.array([1, 2, 3], np.uint32), 40).reshape(12, 10)
        mask = LabelMask(labels, {1: ClassInfo("a"), 2: ClassInfo("b"), 3: ClassInfo("c")})
        raster = Raster(np.arange(120, dtype=float).reshape(1, 12, 10))
        ts = stratified_sample(mask, raster, per_class, seed)
        train, ev = split_train_eval(ts, fraction, seed)
        coords = lambda t: set(zip(t.rows.tolist(), t.cols.tolist()))
        assert not coords(train) & coords(ev)
        assert coords(train) | coords(ev) == coords(ts)


def test_csv_round_trip(tmp_path, scene):
    raster, mask = scene
    ts = stratified_sample(mask, raster, 4, seed=9)
    ts.write_csv(tmp_path / "t.csv")
    back = read_training_csv(tmp_path / "t.csv")
    assert np.array_equal(back.rows, ts.rows)
    assert np.array_equal(back.class_ids, ts.class_ids)
    np.testing.assert_array_equal(back.features, ts.features)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "row,col,class_id,band1,band2"
