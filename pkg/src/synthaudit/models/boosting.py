"""Gradient boosting with shallow best-first trees.

Trees are grown on pre-binned features (at most ``max_bins`` bins per
column) with second-order gain, so a split never needs the raw values;
thresholds are stored as real numbers for prediction on raw inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import DegenerateTarget, DimensionMismatch

PROBA_EPS = 1e-15


@dataclass
class TreeModel:
    """Binary tree stored as parallel arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_splits(self) -> int:
        return int((self.feature >= 0).sum())

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            rows = np.flatnonzero(inner)
            go_left = X[rows, f[inner]] <= self.threshold[node[inner]]
            node[rows] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def bin_thresholds(x: np.ndarray, max_bins: int) -> np.ndarray:
    """Candidate split thresholds for one column (sorted, unique)."""
    u = np.unique(x)
    if u.size <= max_bins:
        return (u[:-1] + u[1:]) / 2.0
    q = np.quantile(x, np.linspace(0, 1, max_bins + 1)[1:-1])
    return np.unique(q)


class _Binned:
    def __init__(self, X, max_bins):
        self.thresholds = [bin_thresholds(X[:, j], max_bins) for j in range(X.shape[1])]
        self.n_bins = max(len(t) for t in self.thresholds) + 1 if self.thresholds else 1
        self.codes = self.transform(X)

    def transform(self, X):
        codes = np.empty(X.shape, dtype=np.intp)
        for j, t in enumerate(self.thresholds):
            codes[:, j] = np.searchsorted(t, X[:, j], side="left")
        return codes


def _best_split(binned, rows, g, h, reg_lambda, min_child_weight):
    """Return (gain, feature, bin) of the best split of ``rows`` or None."""
    codes = binned.codes[rows]
    p = codes.shape[1]
    nb = binned.n_bins
    flat = (codes + np.arange(p) * nb).ravel()
    G = np.bincount(flat, weights=np.repeat(g[rows], p), minlength=p * nb).reshape(p, nb)
    H = np.bincount(flat, weights=np.repeat(h[rows], p), minlength=p * nb).reshape(p, nb)
    GL = np.cumsum(G, axis=1)[:, :-1]
    HL = np.cumsum(H, axis=1)[:, :-1]
    Gt, Ht = G[0].sum(), H[0].sum()
    GR, HR = Gt - GL, Ht - HL
    gain = GL**2 / (HL + reg_lambda) + GR**2 / (HR + reg_lambda) - Gt**2 / (Ht + reg_lambda)
    valid = (HL >= min_child_weight) & (HR >= min_child_weight)
    for j, t in enumerate(binned.thresholds):
        valid[j, len(t):] = False
    gain = np.where(valid, gain, -np.inf)
    if not np.isfinite(gain).any():
        return None
    j, b = np.unravel_index(np.argmax(gain), gain.shape)
    if gain[j, b] <= 1e-12:
        return None
    return float(gain[j, b]), int(j), int(b)


def grow_tree(binned, g, h, rows=None, max_splits=4, reg_lambda=1.0, min_child_weight=1.0) -> TreeModel:
    """Grow one tree best-first: always split the leaf with the largest gain."""
    if rows is None:
        rows = np.arange(g.size)
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    node_rows = {0: rows}

    def leaf_value(r):
        return -g[r].sum() / (h[r].sum() + reg_lambda)

    value[0] = leaf_value(rows)
    candidates = {}
    split = _best_split(binned, rows, g, h, reg_lambda, min_child_weight)
    if split is not None:
        candidates[0] = split
    for _ in range(max_splits):
        if not candidates:
            break
        node = max(candidates, key=lambda k: (candidates[k][0], -k))
        _, j, b = candidates.pop(node)
        r = node_rows.pop(node)
        mask = binned.codes[r, j] <= b
        children = []
        for part in (r[mask], r[~mask]):
            idx = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(leaf_value(part))
            node_rows[idx] = part
            children.append(idx)
        feature[node] = j
        threshold[node] = float(binned.thresholds[j][b])
        left[node], right[node] = children
        for c in children:
            s = _best_split(binned, node_rows[c], g, h, reg_lambda, min_child_weight)
            if s is not None:
                candidates[c] = s
    return TreeModel(
        np.asarray(feature), np.asarray(threshold), np.asarray(left),
        np.asarray(right), np.asarray(value, dtype=float),
    )


class _BaseBoosting(BaseEstimator):
    def __init__(
        self,
        n_estimators=100,
        learning_rate=0.1,
        max_splits=4,
        reg_lambda=1.0,
        min_child_weight=1.0,
        max_bins=255,
        validation_fraction=0.1,
        n_iter_no_change=10,
        random_state=0,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_splits = max_splits
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.max_bins = max_bins
        self.validation_fraction = validation_fraction
        self.n_iter_no_change = n_iter_no_change
        self.random_state = random_state

    # hooks for the loss
    def _init_score(self, y):
        raise NotImplementedError

    def _grad_hess(self, y, F):
        raise NotImplementedError

    def _loss(self, y, F):
        raise NotImplementedError

    def _split_validation(self, X, y):
        n_val = int(round(self.validation_fraction * len(y)))
        if not self.n_iter_no_change or n_val < 1 or len(y) < 20:
            return X, y, None, None
        stratify = y if self._stratify else None
        X_fit, X_val, y_fit, y_val = train_test_split(
            X, y, test_size=n_val, random_state=self.random_state, stratify=stratify
        )
        return X_fit, y_fit, X_val, y_val

    def _fit(self, X, y):
        X_fit, y_fit, X_val, y_val = self._split_validation(X, y)
        self.base_score_ = self._init_score(y_fit)
        binned = _Binned(X_fit, self.max_bins)
        F = np.full(len(y_fit), self.base_score_)
        self.trees_ = []
        if X_val is not None:
            F_val = np.full(len(y_val), self.base_score_)
            best_loss, best_iter, since_best = self._loss(y_val, F_val), 0, 0
            self.validation_loss_ = [best_loss]
        for _ in range(self.n_estimators):
            g, h = self._grad_hess(y_fit, F)
            tree = grow_tree(
                binned, g, h, max_splits=self.max_splits,
                reg_lambda=self.reg_lambda, min_child_weight=self.min_child_weight,
            )
            if tree.n_splits == 0:
                break
            self.trees_.append(tree)
            F += self.learning_rate * tree.value[tree.apply(X_fit)]
            if X_val is not None:
                F_val += self.learning_rate * tree.predict(X_val)
                loss = self._loss(y_val, F_val)
                self.validation_loss_.append(loss)
                if loss < best_loss - 1e-12:
                    best_loss, best_iter, since_best = loss, len(self.trees_), 0
                else:
                    since_best += 1
                    if since_best >= self.n_iter_no_change:
                        break
        if X_val is not None:
            del self.trees_[best_iter:]
        self.n_features_in_ = X.shape[1]
        return self

    def _check_X(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X

    def decision_function(self, X) -> np.ndarray:
        X = self._check_X(X)
        F = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            F += self.learning_rate * tree.predict(X)
        return F


class BoostedTreesClassifier(ClassifierMixin, _BaseBoosting):
    """Logistic-loss gradient boosting over trees with at most ``max_splits`` splits.

    Early stopping holds out ``validation_fraction`` of the rows (stratified)
    and keeps the ensemble prefix with the lowest validation log-loss.
    """

    _stratify = True

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = y.astype(int)
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise DegenerateTarget("training target has a single class")
        if not np.array_equal(self.classes_, [0, 1]):
            raise DegenerateTarget("target must be coded 0/1")
        return self._fit(X, y)

    def _init_score(self, y):
        p = np.clip(y.mean(), 1e-12, 1 - 1e-12)
        return float(logit(p))

    def _grad_hess(self, y, F):
        p = expit(F)
        return p - y, np.maximum(p * (1 - p), 1e-16)

    def _loss(self, y, F):
        # log(1 + e^F) - y F, numerically stable
        return float(np.mean(np.logaddexp(0.0, F) - y * F))

    def predict_proba(self, X) -> np.ndarray:
        p = np.clip(expit(self.decision_function(X)), PROBA_EPS, 1 - PROBA_EPS)
        return np.column_stack([1 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)


class BoostedTreesRegressor(RegressorMixin, _BaseBoosting):
    """Squared-loss variant, used by the inference-risk attacker model."""

    _stratify = False

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        return self._fit(X, y)

    def _init_score(self, y):
        return float(y.mean())

    def _grad_hess(self, y, F):
        return F - y, np.ones_like(F)

    def _loss(self, y, F):
        return float(np.mean((y - F) ** 2))

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X)


def train_gbm(X, y, seed=0, **params) -> BoostedTreesClassifier:
    return BoostedTreesClassifier(random_state=seed, **params).fit(X, y)
