"""Command-line entry point: ``synthaudit audit|generate|demo``.

Exit status is 0 on success (whatever the scores), 1 on configuration
errors and 2 on data errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import pandas as pd

from .copula import synthesize
from .dataset import build_schema, load_csv, to_csv
from .demo import DEMO_CATEGORICAL, DEMO_TARGET, make_demo_data, split_rows
from .exceptions import ConfigError, DataError
from .report import render_report
from .suite import SuiteConfig, config_with, load_config, resolve_tests, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


def _synth_arg(items):
    out = {}
    for item in items:
        label, sep, path = item.partition("=")
        if not sep:
            label, path = Path(item).stem, item
        if label in out:
            raise ConfigError(f"duplicate synthetic dataset label {label!r}")
        out[label] = Path(path)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthaudit", description="Audit synthetic tabular data.")
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="score synthetic datasets against real train/test data")
    audit.add_argument("--config", help="INI config file; flags below override it")
    audit.add_argument("--train")
    audit.add_argument("--test")
    audit.add_argument("--synth", nargs="+", metavar="[LABEL=]FILE")
    audit.add_argument("--target")
    audit.add_argument("--categorical", help="comma-separated categorical columns")
    audit.add_argument("--tests", help="comma-separated test keys, 'default' or 'all'")
    audit.add_argument("--seed", type=int)
    audit.add_argument("--split", type=float, help="without --test: fraction of train rows kept for training")
    audit.add_argument("--n-jobs", type=int, dest="n_jobs")
    audit.add_argument("--format", choices=("json", "table"), default="json")
    audit.add_argument("--timings", action="store_true", help="add per-test seconds to json diagnostics")
    audit.add_argument("--out", help="output file (default: stdout)")

    gen = sub.add_parser("generate", help="fit the Gaussian copula on the train file and sample")
    gen.add_argument("--config", required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    demo = sub.add_parser("demo", help="write toy train/test/synth files and a config")
    demo.add_argument("--out", required=True, help="directory to create")
    demo.add_argument("--n", type=int, default=5000, help="real rows, split evenly into train and test")
    demo.add_argument("--seed", type=int, default=0)
    return parser


def _audit_config(args) -> SuiteConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        missing = [f"--{k}" for k in ("train", "synth", "target") if getattr(args, k) is None]
        if missing:
            raise ConfigError(f"without --config, {' '.join(missing)} must be given")
        cfg = SuiteConfig(train=Path(args.train), synth={}, target=args.target)
    return config_with(
        cfg,
        train=Path(args.train) if args.train else None,
        test=Path(args.test) if args.test else None,
        synth=_synth_arg(args.synth) if args.synth else None,
        target=args.target,
        categorical=tuple(c.strip() for c in args.categorical.split(",") if c.strip()) if args.categorical is not None else None,
        tests=tuple(resolve_tests(args.tests)) if args.tests else None,
        seed=args.seed,
        split=args.split,
        n_jobs=args.n_jobs,
    )


def _write(data: bytes, out):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_audit(args) -> int:
    report = run_suite(_audit_config(args))
    _write(render_report(report, args.format, include_timings=args.timings), args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if args.n < 1:
        raise ConfigError("--n must be positive")
    header = pd.read_csv(cfg.train, nrows=0).columns.tolist()
    schema = build_schema(header, cfg.target, cfg.categorical, cfg.special_values)
    to_csv(synthesize(load_csv(cfg.train, schema), args.n, args.seed), args.out)
    return EXIT_OK


DEMO_CONFIG = """\
[data]
train = train.csv
test = test.csv
target = {target}
categorical = {categorical}

[synth]
copula = synth_copula.csv

[audit]
tests = default
seed = {seed}

[params]
mmd_subsample = 2000
"""


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = split_rows(make_demo_data(args.n, args.seed), 0.5, args.seed)
    to_csv(train, out / "train.csv")
    to_csv(test, out / "test.csv")
    to_csv(synthesize(train, train.n, args.seed), out / "synth_copula.csv")
    (out / "audit.ini").write_text(DEMO_CONFIG.format(
        target=DEMO_TARGET, categorical=", ".join(DEMO_CATEGORICAL), seed=args.seed,
    ))
    print(f"wrote train.csv, test.csv, synth_copula.csv and audit.ini to {out}")
    return EXIT_OK


COMMANDS = {"audit": cmd_audit, "generate": cmd_generate, "demo": cmd_demo}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(f"configuration error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
