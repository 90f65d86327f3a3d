"""Boruta all-relevant feature selection with shadow features."""
import numpy as np
from scipy.stats import binomtest
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .dataset import Dataset, SmoothedTargetEncoder, feature_matrix
from .exceptions import DegenerateTarget
from .models import train_forest

TENTATIVE, CONFIRMED, REJECTED = "tentative", "confirmed", "rejected"


class BorutaSelector(BaseEstimator, TransformerMixin):
    """Keep the features that beat every permuted shadow copy significantly often.

    Each round appends a column-wise shuffled copy of every feature, fits a
    random forest, and counts a hit for each real feature whose importance
    exceeds the best shadow. A two-sided binomial test (p = 0.5) on the hit
    count then confirms or rejects it. All features stay in the model so the
    shadow pool keeps its size; the loop ends when nothing is tentative or
    after ``max_rounds``.

    With few features the best of p shadows is a low bar: a pure-noise
    column whose chance association with this sample sits above the
    shadow-max median gets confirmed. The shadow block is therefore
    repeated until it holds at least ``min_shadows`` columns.

    Attributes
    ----------
    decision_ : ndarray of str
        ``"confirmed"``, ``"rejected"`` or ``"tentative"`` per feature.
    support_ : ndarray of bool
        Confirmed features.
    hits_ : ndarray of int
    n_rounds_ : int
    """

    def __init__(self, max_rounds=100, alpha=0.05, n_estimators=100, min_shadows=30, random_state=0):
        self.max_rounds = max_rounds
        self.min_shadows = min_shadows
        self.alpha = alpha
        self.n_estimators = n_estimators
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if np.unique(y).size < 2:
            raise DegenerateTarget("Boruta needs both target classes")
        p = X.shape[1]
        rng = np.random.default_rng(self.random_state)
        decision = np.array([TENTATIVE] * p, dtype=object)
        hits = np.zeros(p, dtype=int)
        rounds = 0
        copies = max(1, -(-self.min_shadows // p))
        while rounds < self.max_rounds and (decision == TENTATIVE).any():
            shadows = np.column_stack([rng.permutation(X[:, j]) for _ in range(copies) for j in range(p)])
            forest = train_forest(
                np.hstack([X, shadows]), y,
                seed=int(rng.integers(2**31 - 1)), n_estimators=self.n_estimators,
            )
            imp = forest.feature_importances_
            hits += imp[:p] > imp[p:].max()
            rounds += 1
            for j in np.flatnonzero(decision == TENTATIVE):
                if binomtest(int(hits[j]), rounds, 0.5).pvalue < self.alpha:
                    decision[j] = CONFIRMED if hits[j] > rounds / 2 else REJECTED
        self.decision_ = decision.astype(str)
        self.support_ = decision == CONFIRMED
        self.hits_ = hits
        self.n_rounds_ = rounds
        self.n_features_in_ = p
        return self

    def transform(self, X):
        check_is_fitted(self, "support_")
        return np.asarray(X)[:, self.support_]


def boruta_select(d: Dataset, enc: SmoothedTargetEncoder, seed=0, max_rounds=100) -> list:
    """Confirmed features of ``d`` restricted to its numeric columns."""
    numeric = d.numeric_features
    if not numeric:
        return []
    names = d.feature_names
    sel = BorutaSelector(max_rounds=max_rounds, random_state=seed).fit(feature_matrix(d, enc), d.target())
    return [c for c, keep in zip(names, sel.support_) if keep and c in numeric]
