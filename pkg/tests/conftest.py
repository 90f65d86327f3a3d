import numpy as np
import pandas as pd
import pytest
from hypothesis import HealthCheck, settings

from synthaudit.dataset import build_schema, from_frame

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# --- brute-force oracles ----------------------------------------------------


def auc_pairs(scores, labels):
    """Pairwise AUC: wins plus half ties over all (positive, negative) pairs."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def cloned_oracle(train_rows, synth_rows):
    return sum(any(s == t for t in train_rows) for s in synth_rows)


def close_oracle(train_rows, synth_rows):
    """Number of synth rows within Hamming distance 1 of some train row."""
    count = 0
    for s in synth_rows:
        if any(sum(a != b for a, b in zip(s, t)) <= 1 for t in train_rows):
            count += 1
    return count


# --- small datasets ---------------------------------------------------------


def make_dataset(frame: pd.DataFrame, target="y", categorical=(), special_values=None):
    return from_frame(frame, build_schema(list(frame.columns), target, categorical, special_values))


def mixed_frame(n, seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=n) + shift
    x2 = 0.6 * x1 + rng.normal(size=n)
    c1 = rng.choice(["a", "b", "c"], size=n, p=[0.5, 0.3, 0.2])
    c2 = np.where(rng.random(n) < 0.4, "u", "v")
    logit = 0.9 * x1 - 0.5 * x2 + 0.8 * (c1 == "a")
    y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(float)
    return pd.DataFrame({"x1": x1, "x2": x2, "c1": c1, "c2": c2, "y": y})


@pytest.fixture
def mixed_pair():
    return (
        make_dataset(mixed_frame(400, 1), categorical=("c1", "c2")),
        make_dataset(mixed_frame(400, 2), categorical=("c1", "c2")),
    )


# --- acceptance summary -----------------------------------------------------

ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
