"""In-house binary classifiers and metrics used across the audit tests."""
import numpy as np

from ..exceptions import DimensionMismatch
from .boosting import BoostedTreesClassifier, BoostedTreesRegressor, TreeModel, train_gbm
from .forest import train_forest
from .metrics import auc, cosine_similarity, cross_entropy, gini
from .neural import ReluNetClassifier, train_nn


def predict_proba(model, X) -> np.ndarray:
    """Positive-class probability vector for any fitted classifier here."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features_in_:
        raise DimensionMismatch(f"expected {model.n_features_in_} features")
    return model.predict_proba(X)[:, 1]


__all__ = [
    "BoostedTreesClassifier",
    "BoostedTreesRegressor",
    "ReluNetClassifier",
    "TreeModel",
    "auc",
    "cosine_similarity",
    "cross_entropy",
    "gini",
    "predict_proba",
    "train_forest",
    "train_gbm",
    "train_nn",
]
