"""Similarity, utility and privacy audit for synthetic tabular data."""
from .copula import GaussianCopulaSynthesizer, fit_copula, sample_synthetic, synthesize
from .dataset import ColumnSchema, Dataset, build_schema, from_frame, load_csv, preprocess
from .demo import make_demo_data
from .exceptions import AuditError, ConfigError, DataError
from .params import AuditParams
from .report import DEFAULT_TESTS, TESTS, AuditReport, TestResult, render_report
from .suite import SuiteConfig, load_config, run_audit, run_suite

__version__ = "0.1.0"

__all__ = [
    "AuditError", "AuditParams", "AuditReport", "ColumnSchema", "ConfigError", "DEFAULT_TESTS",
    "DataError", "Dataset", "GaussianCopulaSynthesizer", "SuiteConfig", "TESTS", "TestResult",
    "build_schema", "fit_copula", "from_frame", "load_config", "load_csv", "make_demo_data",
    "preprocess", "render_report", "run_audit", "run_suite", "sample_synthetic", "synthesize",
]
