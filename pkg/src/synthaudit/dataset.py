"""Typed tabular datasets: loading, preprocessing, decile binning, target encoding."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    AllMissingColumn,
    DataError,
    MissingTarget,
    NonBinaryTarget,
    NotNumeric,
    ParseError,
    SchemaMismatch,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

MISSING_CLASS = "__MISSING__"
SPECIAL_PREFIX = "__SPECIAL__"
FLAG_SUFFIX = "__was_missing"
MISSING_TOKENS = ("", "NA", "NaN", "nan")


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str = NUMERIC
    special_values: tuple = ()
    is_target: bool = False

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        object.__setattr__(self, "special_values", tuple(str(v) for v in self.special_values))


def build_schema(columns, target, categorical=(), special_values=None):
    """Build a schema list from column names and the categorical/target declarations."""
    categorical = set(categorical)
    special_values = special_values or {}
    return [
        ColumnSchema(
            name=c,
            kind=CATEGORICAL if c in categorical else NUMERIC,
            special_values=tuple(special_values.get(c, ())),
            is_target=(c == target),
        )
        for c in columns
    ]


@dataclass(frozen=True)
class Dataset:
    """A column-typed table with exactly one target column.

    Numeric columns are stored as float64 with NaN for missing cells,
    categorical columns as object arrays of ``str`` labels with ``None`` for
    missing cells.
    """

    schema: tuple
    frame: pd.DataFrame = field(repr=False)

    def __post_init__(self):
        schema = tuple(self.schema)
        object.__setattr__(self, "schema", schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        if sum(c.is_target for c in schema) != 1:
            raise DataError("schema must declare exactly one target column")
        if list(self.frame.columns) != names:
            raise DataError("frame columns do not follow the schema order")
        if len(self.frame) < 1:
            raise DataError("dataset has no rows")

    @property
    def n(self) -> int:
        return len(self.frame)

    @property
    def names(self) -> list:
        return [c.name for c in self.schema]

    @property
    def target_name(self) -> str:
        return next(c.name for c in self.schema if c.is_target)

    @property
    def feature_names(self) -> list:
        return [c.name for c in self.schema if not c.is_target]

    @property
    def numeric_features(self) -> list:
        return [c.name for c in self.schema if not c.is_target and c.kind == NUMERIC]

    @property
    def categorical_features(self) -> list:
        return [c.name for c in self.schema if not c.is_target and c.kind == CATEGORICAL]

    def column(self, name) -> ColumnSchema:
        for c in self.schema:
            if c.name == name:
                return c
        raise SchemaMismatch(name)

    def target(self) -> np.ndarray:
        return binary_target(self.frame[self.target_name])

    def with_frame(self, frame: pd.DataFrame) -> "Dataset":
        return Dataset(self.schema, frame.reset_index(drop=True))

    def take(self, rows) -> "Dataset":
        return self.with_frame(self.frame.iloc[np.asarray(rows)])


def binary_target(values) -> np.ndarray:
    """Coerce a target column to an int array in {0, 1}."""
    try:
        y = pd.to_numeric(pd.Series(values), errors="raise").to_numpy(dtype=float)
    except (TypeError, ValueError):
        raise NonBinaryTarget("target values must be 0/1") from None
    if np.isnan(y).any() or not np.isin(y, (0.0, 1.0)).all():
        raise NonBinaryTarget("target values must be 0/1")
    return y.astype(int)


def _frame_from_tokens(raw: pd.DataFrame, schema, missing_tokens=MISSING_TOKENS) -> pd.DataFrame:
    out = {}
    for col in schema:
        tokens = raw[col.name].tolist()
        if col.kind == NUMERIC:
            values = np.empty(len(tokens))
            for i, tok in enumerate(tokens):
                tok = tok.strip()
                if tok in missing_tokens:
                    values[i] = np.nan
                    continue
                try:
                    v = float(tok)
                except ValueError:
                    if tok in col.special_values:
                        # non-numeric sentinel: imputed exactly like a missing cell
                        values[i] = np.nan
                        continue
                    raise ParseError(i + 1, col.name, tok) from None
                if not np.isfinite(v):
                    raise ParseError(i + 1, col.name, tok)
                values[i] = v
            out[col.name] = values
        else:
            out[col.name] = pd.array(
                [None if tok in missing_tokens else tok for tok in tokens], dtype=object
            )
    return pd.DataFrame(out, columns=[c.name for c in schema])


def load_csv(path, schema: Sequence[ColumnSchema]) -> Dataset:
    """Read a headed CSV file and parse every cell according to ``schema``."""
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    header = list(raw.columns)
    for col in schema:
        if col.name not in header:
            raise SchemaMismatch(col.name)
    names = {c.name for c in schema}
    for h in header:
        if h not in names:
            raise SchemaMismatch(h)
    return Dataset(tuple(schema), _frame_from_tokens(raw, schema))


def from_frame(frame: pd.DataFrame, schema: Sequence[ColumnSchema]) -> Dataset:
    """Wrap an in-memory frame, coercing dtypes per schema."""
    out = {}
    for col in schema:
        if col.name not in frame.columns:
            raise SchemaMismatch(col.name)
        s = frame[col.name]
        if col.kind == NUMERIC:
            out[col.name] = pd.to_numeric(s, errors="raise").to_numpy(dtype=float)
        else:
            out[col.name] = pd.array(
                [None if pd.isna(v) else str(v) for v in s], dtype=object
            )
    return Dataset(tuple(schema), pd.DataFrame(out, columns=[c.name for c in schema]))


def to_csv(d: Dataset, path) -> None:
    d.frame.to_csv(path, index=False, float_format="%.17g")


def _special_mask(values: np.ndarray, tokens) -> np.ndarray:
    mask = np.isnan(values)
    for tok in tokens:
        try:
            mask |= values == float(tok)
        except ValueError:
            pass
    return mask


def missing_flag_columns(d: Dataset) -> set:
    """Numeric columns that would receive a ``__was_missing`` flag."""
    out = set()
    for col in d.schema:
        if col.kind == NUMERIC and not col.is_target:
            if _special_mask(d.frame[col.name].to_numpy(float), col.special_values).any():
                out.add(col.name)
    return out


def preprocess(d: Dataset, flag_columns: Iterable[str] = ()) -> Dataset:
    """Resolve missing and special cells.

    Categorical gaps become ad-hoc classes; numeric gaps are mean-imputed and
    get a companion 0/1 flag column. ``flag_columns`` forces flags for
    columns that are complete here but incomplete in a sibling dataset, so
    train/test/synth end up with identical schemas.
    """
    flag_columns = set(flag_columns)
    frame = d.frame.copy()
    target = d.target_name
    tmask = pd.isna(frame[target]).to_numpy()
    if tmask.any():
        raise MissingTarget(int(np.argmax(tmask)) + 1)

    schema = []
    flags = {}
    for col in d.schema:
        if col.is_target:
            schema.append(col)
            continue
        if col.kind == CATEGORICAL:
            specials = set(col.special_values)
            frame[col.name] = pd.array(
                [
                    MISSING_CLASS if v is None or (isinstance(v, float) and np.isnan(v))
                    else f"{SPECIAL_PREFIX}{v}" if v in specials else v
                    for v in frame[col.name]
                ],
                dtype=object,
            )
        else:
            values = frame[col.name].to_numpy(dtype=float).copy()
            mask = _special_mask(values, col.special_values)
            if mask.all():
                raise AllMissingColumn(col.name)
            if mask.any():
                values[mask] = values[~mask].mean()
                frame[col.name] = values
            flag_name = col.name + FLAG_SUFFIX
            if (mask.any() or col.name in flag_columns) and flag_name not in d.names:
                flags[flag_name] = pd.array(np.where(mask, "1", "0"), dtype=object)
        schema.append(replace(col, special_values=()))

    for name, values in flags.items():
        frame[name] = values
        schema.append(ColumnSchema(name, CATEGORICAL))
    return Dataset(tuple(schema), frame)


def align_preprocess(*datasets: Dataset) -> list:
    """Preprocess several datasets so that they share one output schema."""
    flags = set()
    for d in datasets:
        flags |= missing_flag_columns(d)
    return [preprocess(d, flags) for d in datasets]


# --- decile binning -------------------------------------------------------

DECILES = np.linspace(0.1, 0.9, 9)


def decile_edges(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.unique(np.quantile(values, DECILES))


def apply_bins(values, edges) -> np.ndarray:
    """Index of the first edge each value does not exceed (len(edges) if none)."""
    return np.searchsorted(np.asarray(edges, dtype=float), np.asarray(values, dtype=float), side="left")


def fit_decile_bins(d: Dataset, column: str) -> np.ndarray:
    if d.column(column).kind != NUMERIC:
        raise NotNumeric(column)
    return decile_edges(d.frame[column].to_numpy(dtype=float))


class DecileBinner(BaseEstimator, TransformerMixin):
    """Replace numeric columns with their decile-bin index.

    Parameters
    ----------
    columns : list of str or None
        Columns to bin. ``None`` bins every numeric column seen in ``fit``.
    """

    def __init__(self, columns=None):
        self.columns = columns

    def fit(self, X: pd.DataFrame, y=None):
        cols = self.columns
        if cols is None:
            cols = [c for c in X.columns if pd.api.types.is_numeric_dtype(X[c])]
        self.bin_edges_ = {c: decile_edges(X[c].to_numpy(dtype=float)) for c in cols}
        return self

    def transform(self, X: pd.DataFrame) -> pd.DataFrame:
        check_is_fitted(self, "bin_edges_")
        X = X.copy()
        for c, edges in self.bin_edges_.items():
            X[c] = apply_bins(X[c].to_numpy(dtype=float), edges)
        return X


def fit_binning_map(d: Dataset) -> DecileBinner:
    """Decile edges for every numeric feature of ``d``."""
    return DecileBinner(columns=d.numeric_features).fit(d.frame)


def binned_frame(d: Dataset, bins: DecileBinner, include_target=True) -> pd.DataFrame:
    """All columns as discrete labels, numerics replaced by bin indices."""
    frame = bins.transform(d.frame)
    if not include_target:
        frame = frame.drop(columns=[d.target_name])
    return frame


# --- target encoding ------------------------------------------------------


class SmoothedTargetEncoder(BaseEstimator, TransformerMixin):
    """Map each categorical class to a smoothed target mean.

    ``code(c) = (sum_y(c) + a * prior) / (count(c) + a)`` with ``prior`` the
    global target mean. The fitted mapping is static, so it can be learned on
    one dataset and applied unchanged to another. Unseen classes map to the
    prior.
    """

    def __init__(self, columns=None, smoothing=1.0):
        self.columns = columns
        self.smoothing = smoothing

    def fit(self, X: pd.DataFrame, y):
        if not self.smoothing > 0:
            raise ValueError("smoothing must be positive")
        y = binary_target(y)
        cols = self.columns
        if cols is None:
            cols = [c for c in X.columns if not pd.api.types.is_numeric_dtype(X[c])]
        self.prior_ = float(y.mean())
        a = float(self.smoothing)
        self.mapping_ = {}
        for c in cols:
            stats = pd.DataFrame({"k": X[c].to_numpy(), "y": y}).groupby("k", sort=True)["y"].agg(["sum", "count"])
            codes = (stats["sum"] + a * self.prior_) / (stats["count"] + a)
            self.mapping_[c] = {k: float(v) for k, v in codes.items()}
        return self

    def transform(self, X: pd.DataFrame) -> pd.DataFrame:
        check_is_fitted(self, "mapping_")
        X = X.copy()
        for c, mapping in self.mapping_.items():
            X[c] = np.array([mapping.get(v, self.prior_) for v in X[c]], dtype=float)
        return X


def fit_target_encoding(d: Dataset, a: float = 1.0) -> SmoothedTargetEncoder:
    return SmoothedTargetEncoder(columns=d.categorical_features, smoothing=a).fit(
        d.frame[d.feature_names], d.target()
    )


def encoded_frame(d: Dataset, enc: SmoothedTargetEncoder) -> pd.DataFrame:
    """All columns as floats, categoricals replaced by their target codes."""
    frame = enc.transform(d.frame)
    frame[d.target_name] = d.target().astype(float)
    for c in d.categorical_features:
        if c not in enc.mapping_:
            frame[c] = enc.prior_
    return frame.astype(float)


def feature_matrix(d: Dataset, enc: SmoothedTargetEncoder, columns=None, include_target=False) -> np.ndarray:
    """Dense float matrix of the (encoded) features in schema order."""
    if columns is None:
        columns = d.names if include_target else d.feature_names
    return encoded_frame(d, enc)[list(columns)].to_numpy(dtype=float)
