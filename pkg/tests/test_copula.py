import numpy as np
import pandas as pd
import pytest

from synthaudit.copula import GaussianCopulaSynthesizer, fit_copula, repair_correlation, sample_synthetic, synthesize
from synthaudit.dataset import fit_target_encoding, preprocess
from synthaudit.distribution import mmd_permutation_test
from synthaudit.exceptions import TooFewRows
from synthaudit.general import correlation_similarity_test, spearman_matrix

from .conftest import make_dataset, mixed_frame


def gaussian_toy(n=1000, seed=0, rho=0.6):
    rng = np.random.default_rng(seed)
    z = rng.multivariate_normal([0, 0, 0], [[1, rho, 0], [rho, 1, 0], [0, 0, 1]], size=n)
    return make_dataset(pd.DataFrame({"a": z[:, 0], "b": z[:, 1], "c": z[:, 2], "y": (z[:, 0] + z[:, 2] > 0).astype(float)}))


class TestFit:
    def test_independent_columns(self):
        rng = np.random.default_rng(0)
        d = make_dataset(pd.DataFrame({"a": rng.normal(size=1000), "b": rng.exponential(size=1000),
                                       "y": rng.integers(0, 2, 1000).astype(float)}))
        C = fit_copula(d).correlation_
        assert np.abs(C[~np.eye(3, dtype=bool)]).max() < 0.1

    def test_duplicate_column(self):
        x = np.random.default_rng(0).normal(size=100)
        d = make_dataset(pd.DataFrame({"a": x, "b": x, "y": (x > 0).astype(float)}))
        assert fit_copula(d).score_correlation_[0, 1] == pytest.approx(1.0)

    def test_constant_column(self):
        rng = np.random.default_rng(0)
        d = make_dataset(pd.DataFrame({"a": rng.normal(size=50), "k": 3.0, "y": rng.integers(0, 2, 50).astype(float)}))
        m = fit_copula(d)
        assert m.constant_columns_ == ["k"]
        assert m.score_correlation_[1].tolist() == [0.0, 1.0, 0.0]
        assert (m.sample(20).frame["k"] == 3.0).all()

    def test_repaired_matrix_is_psd_with_unit_diagonal(self):
        C = np.array([[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]])
        R = repair_correlation(C)
        assert np.linalg.eigvalsh(R).min() > 0
        np.testing.assert_allclose(np.diag(R), 1.0)
        np.testing.assert_allclose(R, R.T)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            fit_copula(gaussian_toy(n=10))


class TestSample:
    def test_zero_rows_rejected(self):
        with pytest.raises(ValueError):
            sample_synthetic(fit_copula(gaussian_toy(200)), 0)

    def test_deterministic(self):
        m = fit_copula(make_dataset(mixed_frame(300, 0), categorical=("c1", "c2")))
        a, b = m.sample(100, seed=4).frame, m.sample(100, seed=4).frame
        pd.testing.assert_frame_equal(a, b)

    def test_bounded_numerics_and_class_proportions(self):
        d = make_dataset(mixed_frame(2000, 0), categorical=("c1", "c2"))
        n = 4000
        s = fit_copula(d).sample(n, seed=1).frame
        for c in ("x1", "x2"):
            assert s[c].min() >= d.frame[c].min() and s[c].max() <= d.frame[c].max()
        for c in ("c1", "c2", "y"):
            fitted = d.frame[c].value_counts(normalize=True)
            sampled = s[c].value_counts(normalize=True).reindex(fitted.index, fill_value=0.0)
            assert (np.abs(fitted - sampled) <= 3 / np.sqrt(n)).all()

    def test_marginals_pass_mmd(self):
        d = gaussian_toy(500)
        m = fit_copula(d)
        accepted = sum(
            mmd_permutation_test(d.frame["b"], m.sample(500, seed=s).frame["b"], B=200, seed=s)[0] for s in range(50)
        )
        assert accepted >= 45

    def test_correlation_structure(self):
        d = gaussian_toy(1000)
        s = fit_copula(d).sample(1000, seed=2)
        enc = fit_target_encoding(d)
        assert correlation_similarity_test(spearman_matrix(d, enc), spearman_matrix(s, enc)).score >= 0.95


def test_synthesize_restores_missing_cells():
    frame = mixed_frame(400, 0)
    frame.loc[::10, "x1"] = np.nan
    frame.loc[::7, "c1"] = None
    raw = make_dataset(frame, categorical=("c1", "c2"))
    out = synthesize(raw, 2000, seed=0)
    assert out.names == raw.names
    assert 0.02 < out.frame["x1"].isna().mean() < 0.2
    assert out.frame["c1"].isna().any()
    preprocess(out)
