"""Factor Analysis of Mixed Data as a scikit-learn transformer."""
import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateData


class FAMD(BaseEstimator, TransformerMixin):
    """PCA on z-scored numerics and weighted, centered one-hot categoricals.

    Each indicator column of class ``c`` is divided by ``sqrt(p_c)`` (its
    class proportion in the fitting data) before centering, which puts
    numeric and categorical columns on a comparable footing. The number of
    kept components is the smallest prefix explaining ``variance_threshold``
    of the total variance, capped at ``max_components``.

    Parameters
    ----------
    categorical : list of str
        Columns treated as categorical; all others are numeric.
    variance_threshold : float, default=0.8
    max_components : int, default=10
    """

    def __init__(self, categorical=(), variance_threshold=0.8, max_components=10):
        self.categorical = categorical
        self.variance_threshold = variance_threshold
        self.max_components = max_components

    def _design(self, X: pd.DataFrame) -> np.ndarray:
        blocks = []
        for c in self.numeric_:
            blocks.append(((X[c].to_numpy(float) - self.num_mean_[c]) / self.num_scale_[c])[:, None])
        for c in self.categorical_:
            values = X[c].astype(str).to_numpy()
            classes, props = self.cat_levels_[c]
            onehot = (values[:, None] == classes[None, :]).astype(float)
            blocks.append(onehot / np.sqrt(props) - np.sqrt(props))
        return np.hstack(blocks) if blocks else np.empty((len(X), 0))

    def fit(self, X: pd.DataFrame, y=None):
        cats = set(self.categorical)
        self.categorical_ = [c for c in X.columns if c in cats]
        self.numeric_ = [c for c in X.columns if c not in cats]
        if len(X.columns) < 1:
            raise DegenerateData("no columns to factorize")
        self.num_mean_ = {c: X[c].to_numpy(float).mean() for c in self.numeric_}
        self.num_scale_ = {}
        for c in self.numeric_:
            sd = X[c].to_numpy(float).std()
            self.num_scale_[c] = sd if sd > 0 else 1.0
        self.cat_levels_ = {}
        for c in self.categorical_:
            classes, counts = np.unique(X[c].astype(str).to_numpy(), return_counts=True)
            self.cat_levels_[c] = (classes, counts / counts.sum())

        Z = self._design(X)
        cov = Z.T @ Z / len(Z)
        eigval, eigvec = np.linalg.eigh(cov)
        order = np.argsort(eigval)[::-1]
        eigval = np.clip(eigval[order], 0.0, None)
        eigvec = eigvec[:, order]
        total = eigval.sum()
        if total <= 0:
            raise DegenerateData("zero total variance")
        # deterministic sign: largest-magnitude loading positive
        flip = np.sign(eigvec[np.argmax(np.abs(eigvec), axis=0), np.arange(eigvec.shape[1])])
        eigvec = eigvec * np.where(flip == 0, 1.0, flip)
        ratio = eigval / total
        k = int(np.searchsorted(np.cumsum(ratio), self.variance_threshold - 1e-12) + 1)
        self.n_components_ = min(k, self.max_components, len(eigval))
        self.eigenvalues_ = eigval
        self.explained_variance_ratio_ = ratio
        self.components_ = eigvec[:, : self.n_components_].T
        return self

    def transform(self, X: pd.DataFrame) -> np.ndarray:
        check_is_fitted(self, "components_")
        return self._design(X) @ self.components_.T
