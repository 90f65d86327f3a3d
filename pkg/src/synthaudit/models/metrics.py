"""Scalar metrics shared by the tests: AUC/Gini, cosine similarity, cross-entropy."""
import numpy as np
from scipy.stats import rankdata

from ..exceptions import DegenerateTarget, DimensionMismatch, ZeroVector


def auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Tied scores receive mid-ranks, which counts every tied positive/negative
    pair as one half.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise DimensionMismatch("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTarget("auc needs both classes")
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def gini(scores, labels) -> float:
    return 2.0 * auc(scores, labels) - 1.0


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape or u.size == 0:
        raise DimensionMismatch("vectors must share a nonzero length")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine similarity of a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def cross_entropy(p, y, eps=1e-12) -> np.ndarray:
    """Per-row binary cross-entropy, probabilities clamped to [eps, 1 - eps]."""
    p = np.clip(np.asarray(p, dtype=float), eps, 1.0 - eps)
    y = np.asarray(y, dtype=float)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
