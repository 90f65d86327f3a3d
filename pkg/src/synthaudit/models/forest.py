"""Bagged random forest used for feature importances (Boruta)."""
import numpy as np
from sklearn.ensemble import RandomForestClassifier

from ..exceptions import DegenerateTarget


def train_forest(X, y, seed=0, n_estimators=100, n_jobs=None) -> RandomForestClassifier:
    """Fit 100 bootstrapped trees with sqrt(p) features tried per split.

    ``feature_importances_`` on the result is the normalized mean impurity
    decrease.
    """
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise DegenerateTarget("training target has a single class")
    return RandomForestClassifier(
        n_estimators=n_estimators,
        max_features="sqrt",
        bootstrap=True,
        random_state=seed,
        n_jobs=n_jobs,
    ).fit(X, y)
