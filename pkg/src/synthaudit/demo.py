"""Toy credit-style data for examples, integration tests and the ``demo`` command."""
from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.special import expit
from scipy.stats import norm

from .dataset import Dataset, build_schema, from_frame

DEMO_TARGET = "default"
DEMO_CATEGORICAL = ("home", "job", "region")
DEMO_COLUMNS = (
    "age", "income", "debt_ratio", "n_accounts", "months_employed",
    "home", "job", "region", DEMO_TARGET,
)

# latent correlation among the eight features, in DEMO_COLUMNS order
_LATENT_CORR = np.array([
    [1.00, 0.35, -0.10, 0.30, 0.55, -0.30, 0.10, 0.00],
    [0.35, 1.00, -0.40, 0.25, 0.40, -0.35, 0.30, 0.05],
    [-0.10, -0.40, 1.00, 0.20, -0.15, 0.20, -0.10, 0.00],
    [0.30, 0.25, 0.20, 1.00, 0.20, -0.10, 0.05, 0.00],
    [0.55, 0.40, -0.15, 0.20, 1.00, -0.20, 0.15, 0.00],
    [-0.30, -0.35, 0.20, -0.10, -0.20, 1.00, -0.10, 0.00],
    [0.10, 0.30, -0.10, 0.05, 0.15, -0.10, 1.00, 0.00],
    [0.00, 0.05, 0.00, 0.00, 0.00, 0.00, 0.00, 1.00],
])


def _cut(u, labels, probs):
    return np.asarray(labels, dtype=object)[np.searchsorted(np.cumsum(probs)[:-1], u, side="right")]


def demo_schema():
    return build_schema(DEMO_COLUMNS, DEMO_TARGET, DEMO_CATEGORICAL)


def make_demo_data(n=5000, seed=0, missing_rate=0.04) -> Dataset:
    """Sample ``n`` rows: five numeric and three categorical features plus a 0/1 target.

    Features enter the default log-odds with clearly different strengths, so
    the information-value ranking is well defined. ``months_employed`` has
    about ``missing_rate`` of its cells missing.
    """
    rng = np.random.default_rng(seed)
    z = rng.multivariate_normal(np.zeros(8), _LATENT_CORR, size=n)
    u = norm.cdf(z)
    age = np.round(18 + 47 * u[:, 0] ** 1.3)
    income = np.round(np.exp(10.3 + 0.5 * z[:, 1]), -2)
    debt_ratio = np.round(u[:, 2] ** 1.5 * 0.9, 4)
    n_accounts = np.floor(-np.log1p(-u[:, 3] * 0.999) * 3)
    months = np.round(np.clip(12 * (age - 18) * u[:, 4] ** 0.5, 0, None))
    home = _cut(u[:, 5], ["own", "mortgage", "rent"], [0.30, 0.40, 0.30])
    job = _cut(u[:, 6], ["manual", "office", "self", "manager"], [0.35, 0.35, 0.15, 0.15])
    region = _cut(u[:, 7], ["north", "south", "east", "west", "center"], [0.25, 0.25, 0.2, 0.2, 0.1])

    logit = (
        -1.6
        + 2.2 * (debt_ratio - 0.35)
        - 0.9 * z[:, 1]
        + 0.6 * (home == "rent")
        - 0.3 * z[:, 0]
        + 0.15 * (job == "self")
        + 0.1 * z[:, 3]
    )
    default = (rng.random(n) < expit(logit)).astype(float)
    months = months.astype(float)
    months[rng.random(n) < missing_rate] = np.nan

    frame = pd.DataFrame({
        "age": age, "income": income, "debt_ratio": debt_ratio, "n_accounts": n_accounts,
        "months_employed": months, "home": home, "job": job, "region": region, DEMO_TARGET: default,
    })
    return from_frame(frame, demo_schema())


def split_rows(d: Dataset, fraction=0.5, seed=0):
    """Random disjoint split into (first, second) with ``fraction`` of rows in the first."""
    order = np.random.default_rng(seed).permutation(d.n)
    cut = int(round(fraction * d.n))
    return d.take(np.sort(order[:cut])), d.take(np.sort(order[cut:]))
