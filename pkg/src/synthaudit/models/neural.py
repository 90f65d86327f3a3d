"""Single-hidden-layer ReLU network for binary classification, in plain numpy."""
from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import DegenerateTarget, DimensionMismatch

PROBA_EPS = 1e-15

PARAM_NAMES = ("W1", "b1", "w2", "b2")


def forward(params, X):
    """Return (pre-activations, hidden activations, output logits)."""
    Z = X @ params["W1"] + params["b1"]
    A = np.maximum(Z, 0.0)
    return Z, A, A @ params["w2"] + params["b2"]


def loss_and_gradients(params, X, y):
    """Mean binary cross-entropy and its gradient w.r.t. every parameter."""
    Z, A, logits = forward(params, X)
    n = X.shape[0]
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    d_logits = (expit(logits) - y) / n
    dA = np.outer(d_logits, params["w2"])
    dZ = dA * (Z > 0)
    grads = {
        "W1": X.T @ dZ,
        "b1": dZ.sum(axis=0),
        "w2": A.T @ d_logits,
        "b2": np.asarray(d_logits.sum()),
    }
    return loss, grads


class ReluNetClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier ``sigmoid(w2 . relu(W1 x + b1) + b2)``.

    Inputs are z-scored with statistics from the training rows. Training is
    mini-batch Adam on cross-entropy with early stopping on a stratified
    validation split, restoring the best epoch's weights.

    Parameters
    ----------
    hidden_units : int, default=256
    batch_size : int, default=256
    learning_rate : float, default=1e-3
        Adam step size.
    max_epochs : int, default=100
    validation_fraction : float, default=0.1
    patience : int, default=5
        Epochs without validation improvement before stopping.
    random_state : int, default=0
    """

    def __init__(
        self,
        hidden_units=256,
        batch_size=256,
        learning_rate=1e-3,
        max_epochs=100,
        validation_fraction=0.1,
        patience=5,
        random_state=0,
    ):
        self.hidden_units = hidden_units
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.random_state = random_state

    @classmethod
    def from_weights(cls, W1, b1, w2, b2, mean=None, scale=None):
        """Build a fitted network from explicit weights (identity scaling by default)."""
        W1 = np.atleast_2d(np.asarray(W1, dtype=float))
        net = cls(hidden_units=W1.shape[1])
        p = W1.shape[0]
        net.params_ = {
            "W1": W1,
            "b1": np.asarray(b1, dtype=float),
            "w2": np.asarray(w2, dtype=float),
            "b2": np.asarray(float(b2)),
        }
        net.mean_ = np.zeros(p) if mean is None else np.asarray(mean, dtype=float)
        net.scale_ = np.ones(p) if scale is None else np.asarray(scale, dtype=float)
        net.n_features_in_ = p
        net.classes_ = np.array([0, 1])
        return net

    def _init_params(self, p, rng):
        H = self.hidden_units
        return {
            "W1": rng.normal(0.0, np.sqrt(2.0 / max(p, 1)), size=(p, H)),
            "b1": np.zeros(H),
            "w2": rng.normal(0.0, np.sqrt(1.0 / H), size=H),
            "b2": np.asarray(0.0),
        }

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = y.astype(float)
        self.classes_ = np.unique(y).astype(int)
        if self.classes_.size < 2:
            raise DegenerateTarget("training target has a single class")
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        Xs = (X - self.mean_) / self.scale_

        rng = np.random.default_rng(self.random_state)
        n_val = int(round(self.validation_fraction * len(y)))
        if n_val >= 2 and len(y) >= 20:
            X_fit, X_val, y_fit, y_val = train_test_split(
                Xs, y, test_size=n_val, stratify=y, random_state=self.random_state
            )
        else:
            X_fit, y_fit, X_val, y_val = Xs, y, None, None

        params = self._init_params(X.shape[1], rng)
        m = {k: np.zeros_like(v) for k, v in params.items()}
        v = {k: np.zeros_like(v) for k, v in params.items()}
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0
        best = {k: p.copy() for k, p in params.items()}
        best_loss = np.inf
        bad_epochs = 0
        self.validation_loss_ = []
        for epoch in range(self.max_epochs):
            order = rng.permutation(len(y_fit))
            for start in range(0, len(order), self.batch_size):
                idx = order[start:start + self.batch_size]
                _, grads = loss_and_gradients(params, X_fit[idx], y_fit[idx])
                step += 1
                for k in PARAM_NAMES:
                    m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
                    v[k] = beta2 * v[k] + (1 - beta2) * grads[k] ** 2
                    m_hat = m[k] / (1 - beta1**step)
                    v_hat = v[k] / (1 - beta2**step)
                    params[k] = params[k] - self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            if X_val is None:
                best = params
                continue
            val_loss, _ = loss_and_gradients(params, X_val, y_val)
            self.validation_loss_.append(val_loss)
            if val_loss < best_loss - 1e-12:
                best_loss = val_loss
                best = {k: p.copy() for k, p in params.items()}
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= self.patience:
                    break
        self.n_epochs_ = epoch + 1 if self.max_epochs else 0
        self.params_ = best
        return self

    def _standardize(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / self.scale_

    def hidden_activations(self, X) -> np.ndarray:
        """Post-ReLU hidden layer values, one row per input row."""
        return forward(self.params_, self._standardize(X))[1]

    def decision_function(self, X) -> np.ndarray:
        return forward(self.params_, self._standardize(X))[2]

    def predict_proba(self, X) -> np.ndarray:
        p = np.clip(expit(self.decision_function(X)), PROBA_EPS, 1 - PROBA_EPS)
        return np.column_stack([1 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)


def train_nn(X, y, seed=0, **params) -> ReluNetClassifier:
    return ReluNetClassifier(random_state=seed, **params).fit(X, y)
