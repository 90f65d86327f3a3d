"""Reference Gaussian copula synthesizer with empirical marginals."""
from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.stats import norm, rankdata
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dataset import CATEGORICAL, FLAG_SUFFIX, MISSING_CLASS, Dataset, preprocess
from .exceptions import TooFewRows

EIGEN_FLOOR = 1e-6


def repair_correlation(C: np.ndarray, floor=EIGEN_FLOOR) -> np.ndarray:
    """Nearest-ish correlation matrix: clip eigenvalues, then restore the unit diagonal."""
    C = (C + C.T) / 2.0
    w, V = np.linalg.eigh(C)
    C = (V * np.maximum(w, floor)) @ V.T
    d = np.sqrt(np.diag(C))
    C = C / np.outer(d, d)
    np.fill_diagonal(C, 1.0)
    return C


class GaussianCopulaSynthesizer(BaseEstimator):
    """Fit per-column empirical marginals joined by a Gaussian copula.

    Numeric columns map to normal scores through mid-ranks; discrete columns
    (categoricals and the target) through the midpoint of their class's
    cumulative-proportion interval. Sampling inverts the same maps, so
    numeric draws stay within the observed range.
    """

    def __init__(self, min_rows=30):
        self.min_rows = min_rows

    def _discrete(self, col):
        return col.kind == CATEGORICAL or col.is_target

    def fit(self, d: Dataset, y=None):
        if d.n < self.min_rows:
            raise TooFewRows(f"need at least {self.min_rows} rows, got {d.n}")
        n = d.n
        self.schema_ = d.schema
        self.marginals_ = {}
        scores = np.empty((n, len(d.schema)))
        for j, col in enumerate(d.schema):
            values = d.frame[col.name]
            if self._discrete(col):
                raw = values.to_numpy()
                keys = raw.astype(str)
                classes, first, counts = np.unique(keys, return_index=True, return_counts=True)
                cum = np.cumsum(counts) / n
                mid = cum - counts / (2.0 * n)
                self.marginals_[col.name] = ("discrete", raw[first], cum)
                scores[:, j] = norm.ppf(mid[np.searchsorted(classes, keys)])
            else:
                x = values.to_numpy(float)
                self.marginals_[col.name] = ("numeric", np.sort(x), None)
                scores[:, j] = norm.ppf((rankdata(x, method="average") - 0.5) / n)
        sd = scores.std(axis=0)
        live = sd > 0
        self.constant_columns_ = [c.name for c, ok in zip(d.schema, live) if not ok]
        C = np.eye(len(d.schema))
        if live.sum() > 1:
            C[np.ix_(live, live)] = np.corrcoef(scores[:, live], rowvar=False)
        self.score_correlation_ = C
        self.correlation_ = repair_correlation(C)
        self.cholesky_ = np.linalg.cholesky(self.correlation_)
        return self

    def sample(self, n: int, seed=0) -> Dataset:
        check_is_fitted(self, "cholesky_")
        if n < 1:
            raise ValueError("sample size must be at least 1")
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n, len(self.schema_))) @ self.cholesky_.T
        u = norm.cdf(z)
        out = {}
        for j, col in enumerate(self.schema_):
            kind, values, cum = self.marginals_[col.name]
            if kind == "numeric":
                out[col.name] = np.quantile(values, u[:, j])
            else:
                idx = np.minimum(np.searchsorted(cum, u[:, j], side="right"), len(values) - 1)
                picked = values[idx]
                out[col.name] = picked.astype(float) if col.kind != CATEGORICAL else pd.array(picked, dtype=object)
        return Dataset(self.schema_, pd.DataFrame(out, columns=[c.name for c in self.schema_]))


def fit_copula(d: Dataset) -> GaussianCopulaSynthesizer:
    return GaussianCopulaSynthesizer().fit(d)


def sample_synthetic(model: GaussianCopulaSynthesizer, n: int, seed=0) -> Dataset:
    return model.sample(n, seed)


def synthesize(raw: Dataset, n: int, seed=0) -> Dataset:
    """Fit on a raw dataset and sample ``n`` rows in the same raw schema.

    Missing numeric cells are modelled through their preprocessing flag
    column and put back as NaN in the sample; the missing class of a
    categorical column becomes an empty cell again.
    """
    pre = preprocess(raw)
    sample = fit_copula(pre).sample(n, seed)
    frame = sample.frame.copy()
    for col in raw.schema:
        flag = col.name + FLAG_SUFFIX
        if flag in frame.columns:
            frame.loc[frame[flag].to_numpy() == "1", col.name] = np.nan
        if col.kind == CATEGORICAL:
            frame[col.name] = pd.array([None if v == MISSING_CLASS else v for v in frame[col.name]], dtype=object)
    return Dataset(raw.schema, frame[raw.names].reset_index(drop=True))
