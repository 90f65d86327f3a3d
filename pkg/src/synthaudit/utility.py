"""Data-utility tests: models trained on train vs synth, compared on test."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, SmoothedTargetEncoder, feature_matrix
from .models import (
    BoostedTreesClassifier,
    ReluNetClassifier,
    auc,
    cosine_similarity,
    predict_proba,
    train_gbm,
    train_nn,
)
from .report import TestResult, clamp01


@dataclass(frozen=True)
class ModelQuartet:
    gb_train: BoostedTreesClassifier
    gb_synth: BoostedTreesClassifier
    nn_train: ReluNetClassifier
    nn_synth: ReluNetClassifier
    enc: SmoothedTargetEncoder
    seed: int


def train_quartet(train: Dataset, synth: Dataset, enc: SmoothedTargetEncoder, seed=0) -> ModelQuartet:
    """Fit the boosted trees and the network on each dataset with one shared seed."""
    Xt, yt = feature_matrix(train, enc), train.target()
    Xs, ys = feature_matrix(synth, enc), synth.target()
    return ModelQuartet(
        gb_train=train_gbm(Xt, yt, seed),
        gb_synth=train_gbm(Xs, ys, seed),
        nn_train=train_nn(Xt, yt, seed),
        nn_synth=train_nn(Xs, ys, seed),
        enc=enc,
        seed=seed,
    )


def aggregate_score(auc_gb_train, auc_gb_synth, auc_nn_train, auc_nn_synth) -> float:
    return clamp01(1.0 - ((auc_gb_train - auc_gb_synth) + (auc_nn_train - auc_nn_synth)) / 2.0)


def aggregate_prediction_test(q: ModelQuartet, test: Dataset) -> TestResult:
    X, y = feature_matrix(test, q.enc), test.target()
    aucs = {
        "gb_train": auc(predict_proba(q.gb_train, X), y),
        "gb_synth": auc(predict_proba(q.gb_synth, X), y),
        "nn_train": auc(predict_proba(q.nn_train, X), y),
        "nn_synth": auc(predict_proba(q.nn_synth, X), y),
    }
    score = aggregate_score(aucs["gb_train"], aucs["gb_synth"], aucs["nn_train"], aucs["nn_synth"])
    return TestResult("aggregate_predictions", score, {"auc": aucs, "seed": q.seed})


def single_prediction_score(pred_gb_train, pred_gb_synth, pred_nn_train, pred_nn_synth) -> float:
    return (cosine_similarity(pred_gb_synth, pred_gb_train) + cosine_similarity(pred_nn_synth, pred_nn_train)) / 2.0


def single_prediction_test(q: ModelQuartet, test: Dataset) -> TestResult:
    X = feature_matrix(test, q.enc)
    cs_gb = cosine_similarity(predict_proba(q.gb_synth, X), predict_proba(q.gb_train, X))
    cs_nn = cosine_similarity(predict_proba(q.nn_synth, X), predict_proba(q.nn_train, X))
    return TestResult("single_predictions", clamp01((cs_gb + cs_nn) / 2.0), {"cosine_gb": cs_gb, "cosine_nn": cs_nn})


def hidden_activations(net: ReluNetClassifier, X) -> np.ndarray:
    return net.hidden_activations(X)


def linear_cka(A, B) -> float:
    """Linear centered kernel alignment between two representations of the same rows.

    Invariant to orthogonal transforms and isotropic scaling of either
    argument. Returns 0.0 when either matrix is constant.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] != B.shape[0]:
        raise ValueError("representations must cover the same rows")
    A = A - A.mean(axis=0)
    B = B - B.mean(axis=0)
    norm_a = np.linalg.norm(A.T @ A)
    norm_b = np.linalg.norm(B.T @ B)
    if norm_a == 0 or norm_b == 0:
        return 0.0
    return float(np.linalg.norm(B.T @ A) ** 2 / (norm_a * norm_b))


def model_internals_test(q: ModelQuartet, test: Dataset) -> TestResult:
    X = feature_matrix(test, q.enc)
    A = hidden_activations(q.nn_train, X)
    B = hidden_activations(q.nn_synth, X)
    score = linear_cka(A, B)
    diag = {"kernel": "linear"}
    if score == 0.0:
        diag["zero_matrix"] = True
    return TestResult("model_internals", clamp01(score), diag)
