"""Suite runner: configuration, shared artifacts and the per-dataset test loop."""
from __future__ import annotations

import configparser
import hashlib
import pickle
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import pandas as pd

from .boruta import boruta_select
from .dataset import (
    Dataset,
    DecileBinner,
    SmoothedTargetEncoder,
    align_preprocess,
    build_schema,
    fit_binning_map,
    fit_target_encoding,
    load_csv,
)
from .demo import split_rows
from .distribution import (
    discriminator_test,
    multivariate_categorical_suite,
    multivariate_continuous_test,
    univariate_suite,
)
from .exceptions import ConfigError, DataError, SchemaMismatch
from .famd import FAMD
from .general import correlation_similarity_test, information_value, predictive_power_test, spearman_matrix
from .params import AuditParams, derive_seed
from .privacy import (
    cloned_rows_test,
    close_rows_test,
    famd_categoricals,
    inference_risk_test,
    linkability_distance_test,
    linkability_ml_test,
)
from .report import DEFAULT_TESTS, TESTS, AuditReport, TestResult
from .utility import (
    aggregate_prediction_test,
    model_internals_test,
    single_prediction_test,
    train_quartet,
)


@dataclass(frozen=True)
class SuiteConfig:
    """Everything one audit run needs.

    ``synth`` maps a report column label to a CSV path. When ``test`` is
    None the train file is split in two with ``split`` of its rows kept
    for training.
    """

    train: Path
    synth: dict
    target: str
    test: Path | None = None
    categorical: tuple = ()
    special_values: dict = field(default_factory=dict)
    tests: tuple = tuple(DEFAULT_TESTS)
    seed: int = 0
    n_jobs: int = 1
    split: float = 0.5
    params: AuditParams = AuditParams()


def resolve_tests(names) -> list:
    """Normalize a test selection; ``default`` and ``all`` expand to the registry."""
    if isinstance(names, str):
        names = [n for n in names.replace(",", " ").split()]
    out = []
    for n in names:
        key = n.strip().lower().replace("-", "_")
        expand = DEFAULT_TESTS if key == "default" else list(TESTS) if key == "all" else [key]
        for k in expand:
            if k not in TESTS:
                raise ConfigError(f"unknown test {n!r}; available: {', '.join(TESTS)}")
            if k not in out:
                out.append(k)
    if not out:
        raise ConfigError("no test selected")
    return [k for k in TESTS if k in out]


# --- config file ----------------------------------------------------------


def _csv_list(text) -> tuple:
    return tuple(s.strip() for s in str(text).split(",") if s.strip())


def _coerce(name, raw, kind):
    try:
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if kind == "optional_int":
            return None if raw.strip().lower() in ("", "none") else int(raw)
        if kind is tuple:
            return _csv_list(raw)
        if kind == "optional_str":
            return raw.strip() or None
        return kind(raw)
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {name}") from None


_PARAM_KINDS = {
    "permutations": int, "alpha": float, "chi_square_expected": str, "mmd_subsample": "optional_int", "max_group_size": int,
    "eps_scale": float, "smoothing": float, "close_rows_cap": "optional_int",
    "boruta_max_rounds": int, "public_features": tuple, "sensitive": "optional_str",
}


def load_config(path) -> SuiteConfig:
    """Read an INI-style config; relative paths are taken from the file's directory.

    Sections: ``[data]`` (train, test, target, categorical, split),
    ``[synth]`` (label = path, one per line), ``[special_values]``
    (column = comma-separated tokens), ``[audit]`` (tests, seed, n_jobs)
    and ``[params]`` (any :class:`AuditParams` field).
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep column names case-sensitive
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    base = path.parent
    data = cp["data"] if cp.has_section("data") else {}
    for key in ("train", "target"):
        if key not in data:
            raise ConfigError(f"[data] needs a {key!r} entry")
    synth = {k: base / v for k, v in cp.items("synth")} if cp.has_section("synth") else {}
    special = {k: _csv_list(v) for k, v in cp.items("special_values")} if cp.has_section("special_values") else {}
    audit = cp["audit"] if cp.has_section("audit") else {}
    params = {}
    if cp.has_section("params"):
        for k, v in cp.items("params"):
            if k not in _PARAM_KINDS:
                raise ConfigError(f"unknown parameter {k!r}; available: {', '.join(_PARAM_KINDS)}")
            params[k] = _coerce(k, v, _PARAM_KINDS[k])
    return SuiteConfig(
        train=base / data["train"],
        test=base / data["test"] if data.get("test") else None,
        synth=synth,
        target=data["target"],
        categorical=_csv_list(data.get("categorical", "")),
        special_values=special,
        tests=tuple(resolve_tests(audit.get("tests", "default"))),
        seed=_coerce("seed", audit.get("seed", "0"), int),
        n_jobs=_coerce("n_jobs", audit.get("n_jobs", "1"), int),
        split=_coerce("split", data.get("split", "0.5"), float),
        params=AuditParams(**params),
    )


def config_with(cfg: SuiteConfig, **overrides) -> SuiteConfig:
    """Copy of ``cfg`` with the non-None overrides applied."""
    known = {f.name for f in fields(SuiteConfig)}
    changes = {k: v for k, v in overrides.items() if v is not None}
    for k in changes:
        if k not in known:
            raise ConfigError(f"unknown setting {k!r}")
    return replace(cfg, **changes)


# --- shared artifacts -----------------------------------------------------


@dataclass(frozen=True)
class SharedArtifacts:
    """Fitted once per run and reused, unchanged, for every synthetic dataset."""

    bins: DecileBinner
    enc: SmoothedTargetEncoder
    selected: tuple
    famd: FAMD | None
    coords: dict
    corr_test: pd.DataFrame | None
    iv_test: pd.Series | None

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(pickle.dumps(sorted(self.bins.bin_edges_.items())))
        h.update(pickle.dumps(sorted((k, sorted(v.items())) for k, v in self.enc.mapping_.items())))
        h.update(repr(self.selected).encode())
        if self.famd is not None:
            h.update(self.famd.components_.tobytes())
        return h.hexdigest()


_FAMD_TESTS = {"linkability_distance"}


def fit_shared(train: Dataset, test: Dataset, tests, seed=0, params=AuditParams()) -> SharedArtifacts:
    bins = fit_binning_map(test)
    enc = fit_target_encoding(test, params.smoothing)
    selected = ()
    if "multivariate_continuous" in tests:
        selected = tuple(boruta_select(train, enc, derive_seed(seed, "boruta"), params.boruta_max_rounds))
    famd, coords = None, {}
    if _FAMD_TESTS & set(tests):
        real = pd.concat([train.frame, test.frame], ignore_index=True)
        famd = FAMD(famd_categoricals(train)).fit(real)
        coords = {"train": famd.transform(train.frame), "test": famd.transform(test.frame)}
    corr = spearman_matrix(test, enc) if "correlations" in tests else None
    iv = information_value(test, bins) if "predictive_power" in tests else None
    return SharedArtifacts(bins, enc, selected, famd, coords, corr, iv)


# --- per-dataset runs -----------------------------------------------------


class _SynthRun:
    """Runs the selected tests against one synthetic dataset, caching joint work."""

    def __init__(self, label, train, test, synth, shared, params, seed):
        self.label, self.train, self.test, self.synth = label, train, test, synth
        self.shared, self.params = shared, params
        self.seed = derive_seed(seed, "synth", label)
        self._cache = {}

    def _s(self, *keys):
        return derive_seed(self.seed, *keys)

    def _once(self, name, fn):
        if name not in self._cache:
            self._cache[name] = fn()
        return self._cache[name]

    def quartet(self):
        return self._once("quartet", lambda: train_quartet(self.train, self.synth, self.shared.enc, self._s("utility")))

    def univariate(self):
        return self._once("univariate", lambda: univariate_suite(
            self.test, self.synth, self.shared.bins, self.params, self._s("univariate")))

    def run(self, key) -> TestResult:
        sh, p = self.shared, self.params
        if key == "correlations":
            return correlation_similarity_test(sh.corr_test, spearman_matrix(self.synth, sh.enc))
        if key == "predictive_power":
            return predictive_power_test(sh.iv_test, information_value(self.synth, sh.bins))
        if key == "univariate_bins":
            return self.univariate()[0]
        if key == "univariate_mmd":
            return self.univariate()[1]
        if key == "multivariate_categorical":
            return multivariate_categorical_suite(self.test, self.synth, p)
        if key == "multivariate_continuous":
            return multivariate_continuous_test(self.test, self.synth, sh.selected, p, self._s("multivariate"))
        if key == "discriminator":
            return discriminator_test(self.train, self.test, self.synth, sh.enc, self._s("discriminator"))
        if key == "aggregate_predictions":
            return aggregate_prediction_test(self.quartet(), self.test)
        if key == "single_predictions":
            return single_prediction_test(self.quartet(), self.test)
        if key == "model_internals":
            return model_internals_test(self.quartet(), self.test)
        if key == "cloned_rows":
            return cloned_rows_test(self.train, self.synth)
        if key == "close_rows":
            return close_rows_test(self.train, self.synth, sh.bins, p.close_rows_cap, self._s("close"))
        if key == "linkability_distance":
            coords = {**sh.coords, "synth": sh.famd.transform(self.synth.frame)}
            return linkability_distance_test(coords, p.eps_scale)
        if key == "linkability_ml":
            return linkability_ml_test(self.train, self.test, self.synth, sh.enc, self._s("linkability"))
        if key == "inference_risk":
            if p.sensitive is None:
                return TestResult.skip(key, "no sensitive attribute configured")
            public = p.public_features or tuple(c for c in self.train.feature_names if c != p.sensitive)
            return inference_risk_test(self.train, self.synth, sh.enc, public, p.sensitive, self._s("inference"))
        raise ConfigError(f"unknown test {key!r}")

    def run_all(self, tests):
        results, timings = {}, {}
        for key in tests:
            start = time.perf_counter()
            try:
                results[key] = self.run(key)
            except DataError as e:
                results[key] = TestResult.skip(key, str(e), error=type(e).__name__)
            timings[key] = round(time.perf_counter() - start, 3)
        return results, timings


def run_audit(train: Dataset, test: Dataset, synths: dict, tests=None, seed=0, params=AuditParams(), n_jobs=1):
    """Audit already-loaded raw datasets; ``synths`` maps label -> Dataset.

    Datasets are preprocessed together so they share one schema. Shared
    artifacts are fitted once; each synthetic dataset then runs in its own
    worker with seeds derived from its label, so the report does not depend
    on ``n_jobs``.
    """
    tests = resolve_tests(DEFAULT_TESTS if tests is None else tests)
    if not synths:
        raise ConfigError("at least one synthetic dataset is required")
    labels = list(synths)
    for label, d in synths.items():
        if d.names != train.names or d.names != test.names:
            missing = [c for c in train.names if c not in d.names] or [c for c in d.names if c not in train.names]
            raise SchemaMismatch(missing[0] if missing else label)
    train, test, *synth_list = align_preprocess(train, test, *(synths[l] for l in labels))

    started = time.perf_counter()
    shared = fit_shared(train, test, tests, seed, params)
    shared_seconds = round(time.perf_counter() - started, 3)
    runs = [_SynthRun(l, train, test, s, shared, params, seed) for l, s in zip(labels, synth_list)]
    if n_jobs and n_jobs > 1 and len(runs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(lambda r: r.run_all(tests), runs))
    else:
        outcomes = [r.run_all(tests) for r in runs]

    results, timings = {}, {("shared", "*"): shared_seconds}
    for label, (res, tim) in zip(labels, outcomes):
        for key in tests:
            results[(key, label)] = res[key]
            timings[(key, label)] = tim[key]
    metadata = {
        "seed": int(seed),
        "rows": {"train": train.n, "test": test.n, **{l: s.n for l, s in zip(labels, synth_list)}},
        "boruta_selected": list(shared.selected),
        "shared_fingerprint": shared.fingerprint(),
        "params": {f.name: getattr(params, f.name) for f in fields(params)},
    }
    return AuditReport(list(tests), labels, results, metadata, timings)


def load_inputs(cfg: SuiteConfig):
    """Load train/test/synth CSVs per ``cfg``; split train when no test file is given."""
    if not cfg.synth:
        raise ConfigError("no synthetic dataset configured")
    header = pd.read_csv(cfg.train, nrows=0).columns.tolist()
    if cfg.target not in header:
        raise ConfigError(f"target {cfg.target!r} is not a column of {cfg.train}")
    for c in cfg.categorical:
        if c not in header:
            raise ConfigError(f"categorical column {c!r} is not in {cfg.train}")
    schema = build_schema(header, cfg.target, cfg.categorical, cfg.special_values)
    train = load_csv(cfg.train, schema)
    if cfg.test is None:
        if not 0 < cfg.split < 1:
            raise ConfigError("split must lie strictly between 0 and 1")
        train, test = split_rows(train, cfg.split, derive_seed(cfg.seed, "split"))
    else:
        test = load_csv(cfg.test, schema)
    synths = {label: load_csv(p, schema) for label, p in cfg.synth.items()}
    return train, test, synths


def run_suite(cfg: SuiteConfig) -> AuditReport:
    tests = resolve_tests(cfg.tests)
    train, test, synths = load_inputs(cfg)
    return run_audit(train, test, synths, tests, cfg.seed, cfg.params, cfg.n_jobs)
