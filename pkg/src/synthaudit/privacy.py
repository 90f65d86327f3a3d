"""Black-box privacy tests: singling out, linkability and inference risk."""
from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from .dataset import (
    CATEGORICAL,
    Dataset,
    DecileBinner,
    SmoothedTargetEncoder,
    binned_frame,
    feature_matrix,
)
from .exceptions import DataError, DegenerateData, EmptyPublicSet, SchemaMismatch, SensitiveNotFound
from .famd import FAMD
from .models import (
    BoostedTreesClassifier,
    BoostedTreesRegressor,
    auc,
    cross_entropy,
    predict_proba,
    train_nn,
)
from .params import AuditParams, derive_seed, subsample_indices
from .report import TestResult, clamp01


# --- singling out ---------------------------------------------------------


def canonical_rows(d: Dataset) -> list:
    """Rows as hashable tuples, numerics rounded to 9 significant digits."""
    cols = []
    for col in d.schema:
        values = d.frame[col.name]
        if col.kind == CATEGORICAL:
            cols.append([str(v) for v in values])
        else:
            cols.append([format(float(v), ".9g") for v in values])
    return list(zip(*cols))


def cloned_rows_test(train: Dataset, synth: Dataset) -> TestResult:
    seen = set(canonical_rows(train))
    cloned = sum(row in seen for row in canonical_rows(synth))
    return TestResult("cloned_rows", 1.0 - cloned / synth.n, {"cloned": cloned, "n_synth": synth.n})


def _joint_codes(a: pd.DataFrame, b: pd.DataFrame):
    """Integer-code two frames column by column over a shared vocabulary."""
    ca, cb = [], []
    for c in a.columns:
        codes, _ = pd.factorize(pd.concat([a[c], b[c]], ignore_index=True).astype(str), sort=True)
        ca.append(codes[: len(a)])
        cb.append(codes[len(a):])
    return np.column_stack(ca), np.column_stack(cb)


def close_to_any(train_codes: np.ndarray, synth_codes: np.ndarray, max_distance=1, chunk=256) -> np.ndarray:
    """For each synth row: does some train row differ in at most ``max_distance`` fields?"""
    train_u = np.unique(train_codes, axis=0)
    synth_u, inverse = np.unique(synth_codes, axis=0, return_inverse=True)
    close_u = np.zeros(len(synth_u), dtype=bool)
    for start in range(0, len(synth_u), chunk):
        block = synth_u[start:start + chunk]
        dist = (block[:, None, :] != train_u[None, :, :]).sum(axis=2)
        close_u[start:start + chunk] = (dist <= max_distance).any(axis=1)
    return close_u[np.ravel(inverse)]


def close_rows_test(train: Dataset, synth: Dataset, bins: DecileBinner, cap=None, seed=0) -> TestResult:
    """Fraction of synth rows at Hamming distance >= 2 from every (binned) train row."""
    tf = binned_frame(train, bins)
    sf = binned_frame(synth, bins)
    rows = subsample_indices(len(tf), cap, derive_seed(seed, "close-rows"))
    tc, sc = _joint_codes(tf.iloc[rows], sf)
    close = close_to_any(tc, sc)
    return TestResult("close_rows", float(1.0 - close.mean()), {
        "close": int(close.sum()), "n_synth": int(len(close)), "n_train_scanned": int(len(rows)),
    })


# --- linkability ----------------------------------------------------------


def famd_categoricals(d: Dataset) -> list:
    return d.categorical_features + [d.target_name]


def famd_project(train: Dataset, test: Dataset, synth: Dataset, variance_threshold=0.8, max_components=10):
    """Fit FAMD on train and test together; return (model, {name: coordinates})."""
    real = pd.concat([train.frame, test.frame], ignore_index=True)
    model = FAMD(famd_categoricals(train), variance_threshold, max_components).fit(real)
    coords = {name: model.transform(d.frame) for name, d in (("train", train), ("test", test), ("synth", synth))}
    return model, coords


def neighbourhood_rank(real: np.ndarray, synth: np.ndarray, eps_scale=1.0):
    """Fraction of synth points strictly within epsilon of each real point.

    Epsilon is the median nearest-synth distance over the real points times
    ``eps_scale``. If that median is 0 (more than half the real points have
    an exact synthetic copy) the ball is closed instead, so exact copies
    still count. Returns (rank, epsilon).
    """
    tree = cKDTree(synth)
    nearest, _ = tree.query(real, k=1)
    eps = float(np.median(nearest) * eps_scale)
    radius = np.nextafter(eps, 0.0) if eps > 0 else 0.0
    counts = tree.query_ball_point(real, r=radius, return_length=True)
    return np.asarray(counts, dtype=float) / len(synth), eps


def linkability_distance_test(coords: dict, eps_scale=1.0) -> TestResult:
    """Does synth crowd around train records more than around test records?

    Real records are ranked by the share of synth records in their
    neighbourhood; the AUC of that rank separating train (positive) from test
    is turned into ``1 - (2 AUC - 1)``, clamped to [0, 1].
    """
    tr, te, sy = coords["train"], coords["test"], coords["synth"]
    if sy.shape[1] == 0:
        raise DegenerateData("no FAMD components")
    rank, eps = neighbourhood_rank(np.vstack([tr, te]), sy, eps_scale)
    labels = np.r_[np.ones(len(tr), dtype=int), np.zeros(len(te), dtype=int)]
    a = auc(rank, labels)
    return TestResult("linkability_distance", clamp01(2.0 - 2.0 * a), {
        "auc_rank": a, "epsilon": eps, "components": int(sy.shape[1]),
    })


def max_threshold_gap(err_train, err_test):
    """max over tau of P_train{err < tau} - P_test{err < tau}, and the maximizing tau."""
    err_train = np.sort(np.asarray(err_train, dtype=float))
    err_test = np.sort(np.asarray(err_test, dtype=float))
    taus = np.r_[np.unique(np.r_[err_train, err_test]), np.inf]
    gap = (
        np.searchsorted(err_train, taus, side="left") / err_train.size
        - np.searchsorted(err_test, taus, side="left") / err_test.size
    )
    i = int(np.argmax(gap))
    return float(gap[i]), float(taus[i])


def linkability_ml_test(train: Dataset, test: Dataset, synth: Dataset, enc: SmoothedTargetEncoder, seed=0) -> TestResult:
    """Membership signal in the errors of a network trained on synth only."""
    net = train_nn(feature_matrix(synth, enc), synth.target(), seed)
    err_train = cross_entropy(predict_proba(net, feature_matrix(train, enc)), train.target())
    err_test = cross_entropy(predict_proba(net, feature_matrix(test, enc)), test.target())
    gap, tau = max_threshold_gap(err_train, err_test)
    return TestResult("linkability_ml", clamp01(1.0 - gap), {"max_gap": gap, "tau": tau})


# --- inference ------------------------------------------------------------


def inference_ratio(y, pred, y_bar) -> float:
    """Residual sum of squares of ``pred`` relative to the constant ``y_bar``."""
    y = np.asarray(y, dtype=float)
    denom = np.sum((y - y_bar) ** 2)
    if denom == 0:
        raise DegenerateData("sensitive attribute is constant")
    return float(np.sum((y - np.asarray(pred, dtype=float)) ** 2) / denom)


def _sensitive_values(d: Dataset, name: str, classes=None):
    col = d.column(name)
    if col.is_target:
        return d.target().astype(float), True, None
    if col.kind == CATEGORICAL:
        values = d.frame[name].astype(str).to_numpy()
        classes = np.unique(values) if classes is None else classes
        if classes.size != 2:
            raise DataError(f"categorical sensitive column {name!r} must be binary")
        return (values == classes[1]).astype(float), True, classes
    return d.frame[name].to_numpy(float), False, None


def inference_risk_test(
    train: Dataset, synth: Dataset, enc: SmoothedTargetEncoder, public_features, sensitive, seed=0,
) -> TestResult:
    """How well does a model fit on synth predict a sensitive attribute of train rows?

    Score is the ratio of the attacker's squared error to that of the known
    average, clamped to [0, 1]; low values mean high disclosure.
    """
    if sensitive not in train.names:
        raise SensitiveNotFound(f"sensitive column {sensitive!r} not in schema")
    public = [c for c in public_features if c != sensitive]
    if not public:
        raise EmptyPublicSet("no public feature available to the attacker")
    for c in public:
        if c not in train.names:
            raise SchemaMismatch(c)
    y_syn, binary, classes = _sensitive_values(synth, sensitive)
    y_tr, _, _ = _sensitive_values(train, sensitive, classes)
    X_syn = feature_matrix(synth, enc, columns=public)
    X_tr = feature_matrix(train, enc, columns=public)
    if binary:
        model = BoostedTreesClassifier(random_state=seed).fit(X_syn, y_syn.astype(int))
        pred = predict_proba(model, X_tr)
    else:
        model = BoostedTreesRegressor(random_state=seed).fit(X_syn, y_syn)
        pred = model.predict(X_tr)
    ratio = inference_ratio(y_tr, pred, y_tr.mean())
    return TestResult("inference_risk", clamp01(ratio), {"ratio": ratio, "public": public, "sensitive": sensitive})
