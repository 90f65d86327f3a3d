import numpy as np
import pandas as pd
import pytest

from synthaudit.boruta import CONFIRMED, REJECTED, BorutaSelector, boruta_select
from synthaudit.dataset import fit_target_encoding
from synthaudit.exceptions import DegenerateTarget

from .conftest import make_dataset


def signal_data(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 5))
    return X, (X[:, 0] + X[:, 1] > 0).astype(int)


class TestBoruta:
    def test_recovers_signal(self):
        X, y = signal_data(seed=11)
        sel = BorutaSelector(random_state=11).fit(X, y)
        assert sel.support_.tolist() == [True, True, False, False, False]
        assert set(sel.decision_[:2]) == {CONFIRMED}
        assert sel.transform(X).shape == (len(X), 2)

    def test_pure_noise_selects_nothing(self):
        rng = np.random.default_rng(3)
        sel = BorutaSelector(random_state=3).fit(rng.normal(size=(1000, 5)), rng.integers(0, 2, 1000))
        assert not sel.support_.any()

    def test_rejected_when_always_beaten(self):
        X, y = signal_data(n=400, seed=1)
        sel = BorutaSelector(random_state=1, max_rounds=30).fit(X, y)
        assert sel.n_rounds_ <= 30
        assert all(d in (CONFIRMED, REJECTED, "tentative") for d in sel.decision_)

    def test_degenerate_target(self):
        with pytest.raises(DegenerateTarget):
            BorutaSelector().fit(np.zeros((20, 2)), np.ones(20))

    def test_zero_numeric_features(self):
        rng = np.random.default_rng(0)
        frame = pd.DataFrame({"c": rng.choice(["a", "b"], 100), "y": rng.integers(0, 2, 100).astype(float)})
        d = make_dataset(frame, categorical=["c"])
        assert boruta_select(d, fit_target_encoding(d)) == []

    def test_only_numeric_returned(self):
        rng = np.random.default_rng(4)
        n = 600
        x1, x2 = rng.normal(size=n), rng.normal(size=n)
        c = np.where(x1 + x2 > 0, "hi", "lo")
        frame = pd.DataFrame({"x1": x1, "x2": x2, "c": c, "y": (x1 + x2 > 0).astype(float)})
        d = make_dataset(frame, categorical=["c"])
        chosen = boruta_select(d, fit_target_encoding(d), seed=4)
        assert "c" not in chosen and set(chosen) <= {"x1", "x2"}
