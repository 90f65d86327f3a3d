"""Test results, the audit report, and its json/table renderings."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

SCHEMA_VERSION = 1


class TestInfo(NamedTuple):
    name: str
    group: str
    detail: str


# Ordered like the reference results table; inference risk last.
TESTS = {
    "correlations": TestInfo("Correlations", "General", "basic"),
    "predictive_power": TestInfo("Predictive Power", "General", "basic"),
    "univariate_bins": TestInfo("Uni Distrib (bins)", "Distrib", "basic"),
    "univariate_mmd": TestInfo("Uni Distrib (MMD)", "Distrib", "in-depth"),
    "multivariate_categorical": TestInfo("Multi-Categorical Distrib", "Distrib", "basic"),
    "multivariate_continuous": TestInfo("Multi-Continuous Distrib", "Distrib", "in-depth"),
    "discriminator": TestInfo("Discriminator", "Distrib", "in-depth"),
    "aggregate_predictions": TestInfo("Aggregate Predictions", "Utility", "basic"),
    "single_predictions": TestInfo("Single Predictions", "Utility", "in-depth"),
    "model_internals": TestInfo("Model Internals", "Utility", "in-depth"),
    "cloned_rows": TestInfo("Cloned Rows", "Privacy", "basic"),
    "close_rows": TestInfo("Close Rows", "Privacy", "basic"),
    "linkability_distance": TestInfo("Linkability Distance", "Privacy", "basic"),
    "linkability_ml": TestInfo("Linkability ML", "Privacy", "basic"),
    "inference_risk": TestInfo("Inference Risk", "Privacy", "in-depth"),
}

DEFAULT_TESTS = [k for k in TESTS if k != "inference_risk"]


def clamp01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


@dataclass
class TestResult:
    """One test outcome; ``score`` is None when the test was skipped."""

    __test__ = False  # keep pytest from collecting this class

    key: str
    score: float | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def info(self) -> TestInfo:
        return TESTS[self.key]

    @property
    def name(self) -> str:
        return self.info.name

    @property
    def group(self) -> str:
        return self.info.group

    @property
    def detail(self) -> str:
        return self.info.detail

    @property
    def skipped(self) -> bool:
        return self.score is None

    @classmethod
    def skip(cls, key, reason, **diagnostics):
        return cls(key, None, {"skipped": reason, **diagnostics})


@dataclass
class AuditReport:
    """Scores for each selected test, one column per synthetic dataset."""

    tests: list
    datasets: list
    results: dict  # (test key, dataset label) -> TestResult
    metadata: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def score(self, key, label):
        return self.results[(key, label)].score

    def to_dict(self, include_timings=False) -> dict:
        rows = []
        for key in self.tests:
            info = TESTS[key]
            scores, diagnostics = {}, {}
            for label in self.datasets:
                r = self.results[(key, label)]
                if r.skipped:
                    scores[label] = {"score": None, "raw": None, "status": "skipped"}
                else:
                    scores[label] = {"score": round(r.score, 2), "raw": r.score, "status": "ok"}
                diag = dict(r.diagnostics)
                if include_timings and (key, label) in self.timings:
                    diag["seconds"] = self.timings[(key, label)]
                diagnostics[label] = diag
            rows.append({
                "test": info.name,
                "key": key,
                "group": info.group,
                "detail": info.detail,
                "scores": scores,
                "diagnostics": diagnostics,
            })
        return {
            "schema_version": SCHEMA_VERSION,
            "datasets": list(self.datasets),
            "metadata": self.metadata,
            "results": rows,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        items = sorted(obj, key=str) if isinstance(obj, set) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def format_score(score) -> str:
    """Two decimals, trailing zeros dropped: 1.0 -> '1', 0.966 -> '0.97'."""
    if score is None:
        return "skipped"
    text = f"{score:.2f}".rstrip("0").rstrip(".")
    return text if text not in ("-0", "") else "0"


def render_report(report: AuditReport, format="json", include_timings=False) -> bytes:
    if not report.tests:
        raise ValueError("empty report")
    if format == "json":
        payload = _jsonable(report.to_dict(include_timings=include_timings))
        return (json.dumps(payload, indent=2, sort_keys=False) + "\n").encode("utf-8")
    if format == "table":
        header = ["Test", "Group", "Detail", *report.datasets]
        rows = [
            [TESTS[k].name, TESTS[k].group, TESTS[k].detail,
             *(format_score(report.score(k, d)) for d in report.datasets)]
            for k in report.tests
        ]
        widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
        line = lambda r: " | ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip()
        sep = "-+-".join("-" * w for w in widths)
        return ("\n".join([line(header), sep, *map(line, rows)]) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {format!r}")
