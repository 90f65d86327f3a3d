import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.dataset import DecileBinner, binned_frame, fit_binning_map, fit_target_encoding, preprocess
from synthaudit.exceptions import DegenerateData, EmptyPublicSet, SensitiveNotFound
from synthaudit.famd import FAMD
from synthaudit.privacy import (
    canonical_rows,
    cloned_rows_test,
    close_rows_test,
    famd_project,
    inference_ratio,
    inference_risk_test,
    linkability_distance_test,
    linkability_ml_test,
    max_threshold_gap,
    neighbourhood_rank,
)

from .conftest import cloned_oracle, close_oracle, make_dataset, mixed_frame


def small_rows(seed, n_train, n_synth):
    """Coarse random rows so clones and near-misses actually occur."""
    rng = np.random.default_rng(seed)

    def frame(n):
        return pd.DataFrame({
            "x": rng.integers(0, 4, n).astype(float),
            "c": rng.choice(["a", "b"], n),
            "z": rng.integers(0, 3, n).astype(float),
            "y": rng.integers(0, 2, n).astype(float),
        })

    return (make_dataset(frame(n_train), categorical=["c"]), make_dataset(frame(n_synth), categorical=["c"]))


class TestClonedRows:
    def test_copy(self):
        d = make_dataset(mixed_frame(50, 0), categorical=("c1", "c2"))
        assert cloned_rows_test(d, d).score == 0.0

    def test_disjoint(self):
        a, b = (make_dataset(mixed_frame(50, s), categorical=("c1", "c2")) for s in (0, 1))
        assert cloned_rows_test(a, b).score == 1.0

    def test_half_cloned(self):
        a, b = (make_dataset(mixed_frame(40, s), categorical=("c1", "c2")) for s in (0, 1))
        half = a.frame.iloc[:20]
        synth = a.with_frame(pd.concat([half, b.frame.iloc[:20]], ignore_index=True))
        assert cloned_rows_test(a, synth).score == 0.5

    @settings(max_examples=20)
    @given(st.integers(0, 10**6), st.integers(1, 300), st.integers(1, 300))
    def test_matches_oracle(self, seed, n_train, n_synth):
        train, synth = small_rows(seed, n_train, n_synth)
        expected = cloned_oracle(canonical_rows(train), canonical_rows(synth))
        assert cloned_rows_test(train, synth).diagnostics["cloned"] == expected


class TestCloseRows:
    def test_hand_example(self):
        bins = DecileBinner(["x1", "x2"]).fit(pd.DataFrame({"x1": np.arange(1.0, 101), "x2": np.arange(1.0, 101)}))
        train = make_dataset(pd.DataFrame({"c": ["A"], "x1": [1.0], "x2": [1.0], "y": [0.0]}), categorical=["c"])
        synth = make_dataset(
            pd.DataFrame({"c": ["A", "B"], "x1": [1.0, 50.0], "x2": [50.0, 50.0], "y": [0.0, 0.0]}), categorical=["c"]
        )
        r = close_rows_test(train, synth, bins)
        assert r.score == 0.5 and r.diagnostics["close"] == 1

    def test_identical_row_is_close(self):
        d = make_dataset(mixed_frame(30, 0), categorical=("c1", "c2"))
        assert close_rows_test(d, d, fit_binning_map(d)).score == 0.0

    @settings(max_examples=20)
    @given(st.integers(0, 10**6), st.integers(1, 300), st.integers(1, 300))
    def test_matches_oracle(self, seed, n_train, n_synth):
        train, synth = small_rows(seed, n_train, n_synth)
        bins = fit_binning_map(train)
        rows = lambda d: list(binned_frame(d, bins).astype(str).itertuples(index=False, name=None))
        expected = close_oracle(rows(train), rows(synth))
        assert close_rows_test(train, synth, bins).diagnostics["close"] == expected

    def test_cap_subsamples_train(self):
        train, synth = small_rows(0, 200, 50)
        r = close_rows_test(train, synth, fit_binning_map(train), cap=20)
        assert r.diagnostics["n_train_scanned"] == 20


class TestFamd:
    def test_single_numeric_column_is_z_score(self):
        x = np.random.default_rng(0).normal(3, 2, size=200)
        model = FAMD().fit(pd.DataFrame({"x": x}))
        assert model.n_components_ == 1
        np.testing.assert_allclose(model.transform(pd.DataFrame({"x": x}))[:, 0], (x - x.mean()) / x.std(), atol=1e-12)

    def test_perfectly_correlated_columns(self):
        x = np.random.default_rng(0).normal(size=100)
        model = FAMD().fit(pd.DataFrame({"a": x, "b": 2 * x + 1}))
        assert model.n_components_ == 1 and model.explained_variance_ratio_[0] == pytest.approx(1.0)

    def test_orthonormal_components_and_total_variance(self):
        frame = mixed_frame(300, 0).drop(columns="y")
        model = FAMD(["c1", "c2"], variance_threshold=1.0, max_components=50).fit(frame)
        V = model.components_
        np.testing.assert_allclose(V @ V.T, np.eye(len(V)), atol=1e-8)
        # numerics contribute 1 each, a categorical with m classes m - 1
        assert model.eigenvalues_.sum() == pytest.approx(2 + 2 + 1)

    def test_zero_variance(self):
        with pytest.raises(DegenerateData):
            FAMD(["c"]).fit(pd.DataFrame({"c": ["a"] * 5}))


class TestLinkabilityDistance:
    def test_rank_counts_ball(self):
        real = np.zeros((1, 1))
        synth = np.array([[0.1], [0.2], [0.3]] + [[5.0 + i] for i in range(7)])
        rank, _ = neighbourhood_rank(real, synth, eps_scale=3.5)
        assert rank[0] == pytest.approx(0.3)

    @staticmethod
    def coords(shift_synth_to_train, n=400, seed=0):
        rng = np.random.default_rng(seed)
        train, test = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
        synth = train + rng.normal(scale=0.01, size=train.shape) if shift_synth_to_train else rng.normal(size=(n, 3))
        return {"train": train, "test": test, "synth": synth}

    def test_null(self):
        r = linkability_distance_test(self.coords(False))
        assert abs(r.diagnostics["auc_rank"] - 0.5) < 0.1 and r.score >= 0.45

    def test_overfit(self):
        r = linkability_distance_test(self.coords(True))
        assert r.diagnostics["auc_rank"] > 0.9 and r.score < 0.1

    def test_projection_end_to_end(self):
        train, test, synth = (preprocess(make_dataset(mixed_frame(300, s), categorical=("c1", "c2"))) for s in (0, 1, 2))
        model, coords = famd_project(train, test, synth)
        assert coords["synth"].shape == (300, model.n_components_)
        assert 0.0 <= linkability_distance_test(coords).score <= 1.0


class TestLinkabilityMl:
    @pytest.mark.parametrize("a,b,gap", [
        ([0.1, 0.2], [0.3, 0.4], 1.0),
        ([0.3, 0.4], [0.1, 0.2], 0.0),
        ([0.1, 0.3], [0.2, 0.4], 0.5),
    ])
    def test_gap_examples(self, a, b, gap):
        assert max_threshold_gap(a, b)[0] == pytest.approx(gap)

    @given(st.lists(st.floats(0, 10), min_size=1, max_size=30), st.lists(st.floats(0, 10), min_size=1, max_size=30))
    def test_gap_matches_brute_force(self, a, b):
        best = max(
            np.mean(np.asarray(a) < t) - np.mean(np.asarray(b) < t) for t in sorted(set(a) | set(b)) + [np.inf]
        )
        assert max_threshold_gap(a, b)[0] == pytest.approx(best, abs=1e-12)

    def test_null(self):
        train, test, synth = (preprocess(make_dataset(mixed_frame(1000, s), categorical=("c1", "c2"))) for s in (0, 1, 2))
        assert linkability_ml_test(train, test, synth, fit_target_encoding(test)).score >= 0.9

    def test_memorized(self):
        # early stopping on a validation split limits how far the network can
        # memorize, so the drop is moderate rather than total
        def frame(seed, n=300, p=50):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(n, p))
            y = (rng.random(n) < 1 / (1 + np.exp(-X[:, :3].sum(axis=1)))).astype(float)
            return make_dataset(pd.DataFrame(X, columns=[f"x{i}" for i in range(p)]).assign(y=y))

        memorized = []
        for s in range(3):
            train, test, synth = frame(10 * s), frame(10 * s + 1), frame(10 * s + 2)
            enc = fit_target_encoding(test)
            null = linkability_ml_test(train, test, synth, enc).score
            memorized.append(linkability_ml_test(train, test, train, enc).score)
            assert memorized[-1] < null
        assert np.mean(memorized) < 0.85


class TestInference:
    def test_ratio_examples(self):
        y = np.array([0.0, 1.0, 2.0, 3.0])
        assert inference_ratio(y, np.full(4, y.mean()), y.mean()) == 1.0
        assert inference_ratio(y, y, y.mean()) == 0.0
        worse = y.mean() + np.sqrt(1.3) * (y - y.mean()) * -1
        assert inference_ratio(y, y + (worse - y.mean()), y.mean()) == pytest.approx(1.3)

    def test_constant_sensitive(self):
        with pytest.raises(DegenerateData):
            inference_ratio([1.0, 1.0], [1.0, 1.0], 1.0)

    @pytest.fixture
    def pair(self):
        return tuple(preprocess(make_dataset(mixed_frame(400, s), categorical=("c1", "c2"))) for s in (0, 1))

    def test_leaky_public_feature(self, pair):
        train, synth = pair
        enc = fit_target_encoding(synth)
        r = inference_risk_test(train, synth, enc, ["x1"], "x2", seed=0)
        assert 0.0 <= r.score < 1.0
        copy = inference_risk_test(train, train, enc, ["x1", "x2"], "c2", seed=0)
        assert copy.diagnostics["public"] == ["x1", "x2"]

    def test_worse_than_mean_is_clamped(self, pair):
        train, synth = pair
        frame = synth.frame.copy()
        frame["x2"] = -frame["x2"] + 5
        r = inference_risk_test(train, synth.with_frame(frame), fit_target_encoding(synth), ["x1"], "x2")
        assert r.diagnostics["ratio"] > 1 and r.score == 1.0

    def test_errors(self, pair):
        train, synth = pair
        enc = fit_target_encoding(synth)
        with pytest.raises(SensitiveNotFound):
            inference_risk_test(train, synth, enc, ["x1"], "nope")
        with pytest.raises(EmptyPublicSet):
            inference_risk_test(train, synth, enc, ["x2"], "x2")
