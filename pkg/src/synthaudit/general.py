"""Descriptive-statistics comparisons: correlation structure and predictive power."""
import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .dataset import Dataset, DecileBinner, SmoothedTargetEncoder, binned_frame, encoded_frame
from .exceptions import DegenerateTarget, DimensionMismatch, TooFewFeatures
from .report import TestResult, clamp01


def spearman_from_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Spearman matrix of numeric columns; constant columns correlate 0 with all others."""
    ranks = np.column_stack([rankdata(frame[c].to_numpy(float), method="average") for c in frame.columns])
    centered = ranks - ranks.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    live = norms > 0
    unit = np.zeros_like(centered)
    unit[:, live] = centered[:, live] / norms[live]
    R = np.clip(unit.T @ unit, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return pd.DataFrame(R, index=frame.columns, columns=frame.columns)


def spearman_matrix(d: Dataset, enc: SmoothedTargetEncoder) -> pd.DataFrame:
    """Spearman matrix over all columns, categoricals mapped through ``enc``."""
    return spearman_from_frame(encoded_frame(d, enc))


def correlation_similarity_test(Rt, Rs) -> TestResult:
    Rt = np.asarray(Rt, dtype=float)
    Rs = np.asarray(Rs, dtype=float)
    if Rt.shape != Rs.shape:
        raise DimensionMismatch(f"{Rt.shape} vs {Rs.shape}")
    inner = float(np.sum(Rt * Rs))
    cos = inner / (np.linalg.norm(Rt) * np.linalg.norm(Rs))
    return TestResult("correlations", clamp01(cos), {"d_corr": 1.0 - cos})


def iv_from_counts(goods, bads, smoothing=0.5) -> float:
    """Information Value of one discrete feature from per-class good/bad counts."""
    goods = np.asarray(goods, dtype=float) + smoothing
    bads = np.asarray(bads, dtype=float) + smoothing
    g = goods / goods.sum()
    b = bads / bads.sum()
    return float(np.sum((g - b) * np.log(g / b)))


def information_value(d: Dataset, bins: DecileBinner, smoothing=0.5) -> pd.Series:
    """IV per feature; numerics are binned with ``bins`` first.

    Goods are rows with target 0, bads rows with target 1. ``smoothing`` is
    added to every cell count so empty cells keep the IV finite.
    """
    y = d.target()
    if np.unique(y).size < 2:
        raise DegenerateTarget("information value needs both target classes")
    frame = binned_frame(d, bins, include_target=False)
    out = {}
    for c in d.feature_names:
        table = pd.crosstab(frame[c].to_numpy(), y).reindex(columns=[0, 1], fill_value=0)
        out[c] = iv_from_counts(table[0].to_numpy(), table[1].to_numpy(), smoothing)
    return pd.Series(out, dtype=float)


def predictive_power_test(ivt, ivs) -> TestResult:
    ivt = pd.Series(ivt, dtype=float)
    ivs = pd.Series(ivs, dtype=float)
    if isinstance(ivt.index, pd.Index) and not ivt.index.equals(ivs.index):
        ivs = ivs.reindex(ivt.index)
    if len(ivt) < 2:
        raise TooFewFeatures("predictive power needs at least 2 features")
    a, b = ivt.to_numpy(), ivs.to_numpy()
    diag = {"iv_test": dict(ivt), "iv_synth": dict(ivs)}
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return TestResult("predictive_power", 0.0, {**diag, "constant_vector": True})
    rho = float(np.corrcoef(a, b)[0, 1])
    return TestResult("predictive_power", max(0.0, min(1.0, rho)), {**diag, "pearson": rho})
