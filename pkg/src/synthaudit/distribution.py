"""Two-sample distribution tests: MMD, chi-square, multivariate groups, discriminator."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist, pdist
from scipy.special import gammaincc
from sklearn.model_selection import train_test_split

from .dataset import Dataset, DecileBinner, SmoothedTargetEncoder, apply_bins, feature_matrix
from .exceptions import AssumptionsNotMet, DataError, DegenerateSample, InvalidSigma
from .models import gini, predict_proba, train_gbm, train_nn
from .params import AuditParams, derive_seed, subsample_indices
from .report import TestResult, clamp01

ACCEPTED = "accepted"
REJECTED = "rejected"
SKIPPED = "skipped_assumptions"


# --- MMD ------------------------------------------------------------------


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def gaussian_kernel(A, B, sigma) -> np.ndarray:
    return np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * sigma * sigma))


def mmd_statistic(x, y, sigma) -> float:
    """Biased (V-statistic) MMD with a Gaussian kernel of bandwidth ``sigma``."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    x, y = _as_2d(x), _as_2d(y)
    if len(x) < 2 or len(y) < 2:
        raise DataError("MMD needs at least two points per sample")
    kxx = gaussian_kernel(x, x, sigma).mean()
    kyy = gaussian_kernel(y, y, sigma).mean()
    kxy = gaussian_kernel(x, y, sigma).mean()
    return float(np.sqrt(max(0.0, (kxx - kxy) + (kyy - kxy))))


def median_sigma(x, y) -> float:
    """Median heuristic: sigma^2 = median squared pairwise distance / 2.

    When more than half of the pooled pairs coincide (heavily discrete data)
    the median is taken over the nonzero distances instead.
    """
    pooled = np.vstack([_as_2d(x), _as_2d(y)])
    d2 = pdist(pooled, "sqeuclidean")
    if d2.size == 0 or not (d2 > 0).any():
        raise DegenerateSample("pooled sample has no two distinct values")
    med = np.median(d2)
    if med == 0:
        med = np.median(d2[d2 > 0])
    return float(np.sqrt(med / 2.0))


@dataclass
class PermutationNull:
    """Empirical null distribution of a two-sample statistic."""

    samples: np.ndarray
    threshold: float
    observed: float
    sigma: float

    @property
    def accepted(self) -> bool:
        return bool(self.observed <= self.threshold)

    @property
    def p_value(self) -> float:
        return float((1 + np.sum(self.samples >= self.observed)) / (1 + self.samples.size))


def mmd_permutation_test(x, y, B=500, alpha=0.05, seed=0):
    """Permutation test of equal distributions; returns (accepted, PermutationNull).

    The bandwidth is fixed from the observed pooling and reused for every
    re-partition. Each permutation's statistic is the quadratic form
    ``a' K a`` over the pooled kernel matrix, with ``a`` holding +1/m for the
    first group and -1/n for the second.
    """
    if B < 100:
        raise ValueError("use at least 100 permutations")
    x, y = _as_2d(x), _as_2d(y)
    sigma = median_sigma(x, y)
    observed = mmd_statistic(x, y, sigma)
    pooled = np.vstack([x, y])
    m, N = len(x), len(x) + len(y)
    n = N - m
    K = gaussian_kernel(pooled, pooled, sigma)
    rng = np.random.default_rng(seed)
    A = np.full((N, B), -1.0 / n)
    for b in range(B):
        A[rng.permutation(N)[:m], b] = 1.0 / m
    quad = np.einsum("ib,ib->b", A, K @ A)
    samples = np.sqrt(np.maximum(quad, 0.0))
    threshold = float(np.quantile(samples, 1.0 - alpha))
    null = PermutationNull(samples, threshold, observed, sigma)
    return null.accepted, null


# --- chi-square -----------------------------------------------------------


def _aligned_counts(counts_test, counts_synth):
    if isinstance(counts_test, (dict, pd.Series)) or isinstance(counts_synth, (dict, pd.Series)):
        t = pd.Series(counts_test, dtype=float)
        s = pd.Series(counts_synth, dtype=float)
        keys = t.index.union(s.index)
        return t.reindex(keys, fill_value=0).to_numpy(), s.reindex(keys, fill_value=0).to_numpy()
    t = np.asarray(counts_test, dtype=float)
    s = np.asarray(counts_synth, dtype=float)
    if t.shape != s.shape:
        raise DataError("count vectors must align class by class")
    return t, s


EXPECTED_FROM = ("pooled", "test")


def chi_square_statistic(counts_test, counts_synth, expected="pooled"):
    """Chi-square statistic comparing two count vectors: (statistic, df).

    ``expected="pooled"`` runs the homogeneity test on the 2 x C table, with
    expected counts from the pooled class shares; it accounts for sampling
    noise in both samples and is the default in the suite. ``"test"`` treats
    the test proportions as fixed and scores only the synth counts against
    them (goodness of fit), which is calibrated only when the test sample is
    much larger than the synth one. Either way df = C - 1.

    Raises ``AssumptionsNotMet`` unless every class is observed in both
    samples and at least 80% of the expected counts exceed 5.
    """
    if expected not in EXPECTED_FROM:
        raise ValueError(f"expected must be one of {EXPECTED_FROM}")
    t, s = _aligned_counts(counts_test, counts_synth)
    keep = (t > 0) | (s > 0)
    t, s = t[keep], s[keep]
    C = t.size
    if C < 2:
        raise AssumptionsNotMet("fewer than two classes")
    if (t == 0).any() or (s == 0).any():
        raise AssumptionsNotMet("a class has zero frequency in one sample")
    if expected == "pooled":
        observed = np.vstack([t, s])
        e = observed.sum(axis=1, keepdims=True) * observed.sum(axis=0) / observed.sum()
    else:
        observed, e = s, t / t.sum() * s.sum()
    if np.mean(e > 5) < 0.8:
        raise AssumptionsNotMet("fewer than 80% of expected counts exceed 5")
    return float(np.sum((observed - e) ** 2 / e)), C - 1


def chi_square_p_value(statistic, df) -> float:
    """Upper tail of the chi-square law via the regularized incomplete gamma."""
    return float(gammaincc(df / 2.0, statistic / 2.0))


def chi_square_two_sample(counts_test, counts_synth, alpha=0.05, expected="pooled"):
    """Returns ``(accepted, p_value)``; accepted iff p >= alpha."""
    stat, df = chi_square_statistic(counts_test, counts_synth, expected)
    p = chi_square_p_value(stat, df)
    return p >= alpha, p


def _value_counts(values) -> pd.Series:
    return pd.Series(values).value_counts(sort=False)


# --- univariate suite -----------------------------------------------------


def univariate_suite(test: Dataset, synth: Dataset, bins: DecileBinner, params=AuditParams(), seed=0):
    """Chi-square over categoricals and binned numerics, MMD over numerics.

    Returns ``(basic_result, in_depth_result)``; each score is the fraction of
    accepted tests among those whose assumptions held.
    """
    chi_log = {}
    for c in test.feature_names:
        tv, sv = test.frame[c].to_numpy(), synth.frame[c].to_numpy()
        if c in bins.bin_edges_:
            tv, sv = apply_bins(tv, bins.bin_edges_[c]), apply_bins(sv, bins.bin_edges_[c])
        try:
            stat, df = chi_square_statistic(_value_counts(tv), _value_counts(sv), params.chi_square_expected)
            p = chi_square_p_value(stat, df)
            ok = p >= params.alpha
            chi_log[c] = {"status": ACCEPTED if ok else REJECTED, "p_value": p, "statistic": stat}
        except AssumptionsNotMet as e:
            chi_log[c] = {"status": SKIPPED, "reason": str(e)}

    mmd_log = {}
    for c in test.numeric_features:
        ok, info = _mmd_columns(test, synth, [c], params, seed)
        mmd_log[c] = info

    return (
        _fraction_result("univariate_bins", chi_log),
        _fraction_result("univariate_mmd", mmd_log),
    )


def _mmd_columns(test, synth, columns, params, seed, scale=None):
    """Subsample both datasets and run one MMD permutation test on ``columns``."""
    key = "|".join(columns)
    it = subsample_indices(test.n, params.mmd_subsample, derive_seed(seed, "rows-test", key))
    is_ = subsample_indices(synth.n, params.mmd_subsample, derive_seed(seed, "rows-synth", key))
    x = test.frame[columns].to_numpy(float)[it]
    y = synth.frame[columns].to_numpy(float)[is_]
    if scale is not None:
        x, y = x / scale, y / scale
    try:
        ok, null = mmd_permutation_test(x, y, params.permutations, params.alpha, derive_seed(seed, "perm", key))
    except DegenerateSample as e:
        return None, {"status": SKIPPED, "reason": str(e)}
    return ok, {
        "status": ACCEPTED if ok else REJECTED,
        "observed": null.observed,
        "threshold": null.threshold,
        "sigma": null.sigma,
        "p_value": null.p_value,
    }


def _fraction_result(key, log):
    tested = [v for v in log.values() if v["status"] != SKIPPED]
    if not tested:
        return TestResult.skip(key, "no testable variable", variables=log)
    accepted = sum(v["status"] == ACCEPTED for v in tested)
    return TestResult(key, accepted / len(tested), {
        "accepted": accepted, "tested": len(tested), "variables": log,
    })


# --- multivariate ---------------------------------------------------------


def multivariate_continuous_test(test: Dataset, synth: Dataset, selected, params=AuditParams(), seed=0):
    """Joint MMD test over the selected numeric columns, scaled by test std."""
    selected = [c for c in test.numeric_features if c in set(selected)]
    if not selected:
        return TestResult.skip("multivariate_continuous", "empty feature selection")
    scale = test.frame[selected].to_numpy(float).std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    ok, info = _mmd_columns(test, synth, selected, params, seed, scale=scale)
    info["features"] = selected
    if ok is None:
        return TestResult.skip("multivariate_continuous", info["reason"], **info)
    return TestResult("multivariate_continuous", 1.0 if ok else 0.0, info)


def _product_labels(frame: pd.DataFrame, group) -> np.ndarray:
    return frame[list(group)].astype(str).agg("\x1f".join, axis=1).to_numpy()


def scan_categorical_groups(test_frame, synth_frame, columns, max_group_size=4, alpha=0.05, expected="pooled"):
    """Breadth-first chi-square scan over groups of categorical columns.

    A group of size k > 2 is examined only when each of its (k-1)-subgroups
    was actually tested; everything else is pruned and left out of the log.
    Returns (log, n_pruned) with log mapping group tuple -> status.
    """
    columns = list(columns)
    log = {}
    pruned = 0
    for size in range(2, min(max_group_size, len(columns)) + 1):
        for group in combinations(columns, size):
            if size > 2 and any(log.get(sub, SKIPPED) == SKIPPED for sub in combinations(group, size - 1)):
                pruned += 1
                continue
            try:
                ok, _ = chi_square_two_sample(
                    _value_counts(_product_labels(test_frame, group)),
                    _value_counts(_product_labels(synth_frame, group)),
                    alpha,
                    expected,
                )
                log[group] = ACCEPTED if ok else REJECTED
            except AssumptionsNotMet:
                log[group] = SKIPPED
    return log, pruned


def multivariate_categorical_suite(test: Dataset, synth: Dataset, params=AuditParams()):
    cats = test.categorical_features
    if len(cats) < 2:
        return TestResult.skip("multivariate_categorical", "fewer than two categorical variables")
    log, pruned = scan_categorical_groups(
        test.frame, synth.frame, cats, params.max_group_size, params.alpha, params.chi_square_expected
    )
    accepted = sum(s == ACCEPTED for s in log.values())
    rejected = sum(s == REJECTED for s in log.values())
    diag = {
        "groups": {"+".join(g): s for g, s in log.items()},
        "pruned": pruned,
        "accepted": accepted,
        "rejected": rejected,
    }
    if accepted + rejected == 0:
        return TestResult.skip("multivariate_categorical", "no group met the test assumptions", **diag)
    return TestResult("multivariate_categorical", accepted / (accepted + rejected), diag)


# --- discriminator --------------------------------------------------------


def discriminator_test(train: Dataset, test: Dataset, synth: Dataset, enc: SmoothedTargetEncoder, seed=0):
    """Can a classifier tell real rows (train and test) from synthetic ones?

    Both a boosted-tree and a neural discriminator are fit on 70% of the
    stacked rows; score = 1 - mean holdout Gini, each Gini clamped to [0, 1].
    """
    real = np.vstack([
        feature_matrix(train, enc, include_target=True),
        feature_matrix(test, enc, include_target=True),
    ])
    fake = feature_matrix(synth, enc, include_target=True)
    X = np.vstack([real, fake])
    label = np.r_[np.zeros(len(real), dtype=int), np.ones(len(fake), dtype=int)]
    X_fit, X_hold, y_fit, y_hold = train_test_split(
        X, label, test_size=0.3, stratify=label, random_state=derive_seed(seed, "split") % (2**31)
    )
    gbm = train_gbm(X_fit, y_fit, seed)
    nn = train_nn(X_fit, y_fit, seed)
    g_gbm = gini(predict_proba(gbm, X_hold), y_hold)
    g_nn = gini(predict_proba(nn, X_hold), y_hold)
    score = 1.0 - (clamp01(g_gbm) + clamp01(g_nn)) / 2.0
    return TestResult("discriminator", clamp01(score), {"gini_gbm": g_gbm, "gini_nn": g_nn})
