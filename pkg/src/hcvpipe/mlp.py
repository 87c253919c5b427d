"""One-hidden-layer neural network: tanh hidden units, sigmoid output,
full-batch gradient descent on mean binary cross-entropy.

The output unit models the probability of class 1 (disease); the
decision rule is yhat > 0.5 with the boundary itself mapped to class 0,
which is the same test as pre-activation > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .numeric import RngStream


@dataclass
class MlpModel:
    w1: np.ndarray  # (h, q)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float
    losses: np.ndarray  # per-epoch training loss


@dataclass
class ForwardResult:
    hidden: np.ndarray  # tanh activations
    pre: np.ndarray  # output pre-activation
    prob: np.ndarray  # sigmoid(pre), in (0, 1)


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    t = np.exp(-np.abs(x))
    out = np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))
    return float(out) if out.ndim == 0 else out


def forward(model: MlpModel, x) -> ForwardResult:
    """Run the network on one point or a matrix of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != model.w1.shape[1]:
        raise ValueError(f"expected {model.w1.shape[1]} features, got {pts.shape[1]}")
    hidden = np.tanh(pts @ model.w1.T + model.b1)
    pre = hidden @ model.w2 + model.b2
    prob = sigmoid(pre)
    if single:
        return ForwardResult(hidden[0], float(pre[0]), float(prob[0]))
    return ForwardResult(hidden, pre, prob)


def loss_and_gradients(model: MlpModel, X, y):
    """Mean binary cross-entropy over the batch and its exact gradients.

    Returns (loss, {"w1", "b1", "w2", "b2"}). Probabilities are clamped
    to [1e-12, 1-1e-12] inside the log only, so the gradients stay the
    plain (p - y) backpropagation terms.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    n = X.shape[0]
    a1 = np.tanh(X @ model.w1.T + model.b1)
    f2 = a1 @ model.w2 + model.b2
    p = sigmoid(f2)
    pc = np.clip(p, 1e-12, 1.0 - 1e-12)
    loss = float(-np.sum(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)) / n)
    d2 = (p - y) / n
    grads = {
        "w2": d2 @ a1,
        "b2": float(d2.sum()),
    }
    d1 = np.outer(d2, model.w2) * (1.0 - a1 * a1)
    grads["w1"] = d1.T @ X
    grads["b1"] = d1.sum(axis=0)
    return loss, grads


def train_mlp(X, y, h: int = 8, epochs: int = 2000, lr: float = 0.05, seed=0) -> MlpModel:
    """Gradient descent from a seeded uniform(-0.5, 0.5) init.

    y holds {0,1} labels. Raises if the loss ever goes non-finite,
    naming the epoch.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y01.shape != (X.shape[0],):
        raise ValueError("X must be n x q with one label per row")
    if np.all(y01 == y01[0]):
        raise ValueError("single-class input: both classes required")
    if h < 1 or epochs < 1 or lr <= 0:
        raise ValueError("need h >= 1, epochs >= 1, lr > 0")
    rng = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    init = rng.fork("mlp-init")
    q = X.shape[1]
    w1 = init.uniform(-0.5, 0.5, (h, q))
    b1 = init.uniform(-0.5, 0.5, h)
    w2 = init.uniform(-0.5, 0.5, h)
    b2 = init.uniform(-0.5, 0.5, 1)
    losses = kernels.mlp_train(X, y01, w1, b1, w2, b2, float(lr), int(epochs))
    if not np.all(np.isfinite(losses)):
        bad = int(np.flatnonzero(~np.isfinite(losses))[0])
        raise RuntimeError(f"training loss became non-finite at epoch {bad}")
    return MlpModel(w1, b1, w2, float(b2[0]), losses)


def predict_class(model: MlpModel, x):
    """1 when the output probability exceeds 0.5, else 0 (0.5 -> 0)."""
    prob = forward(model, x).prob
    if np.isscalar(prob):
        return int(prob > 0.5)
    return (prob > 0.5).astype(np.int64)


def class0_scores(model: MlpModel, x):
    """Score where larger means more donor-like (class 0): 1 - yhat."""
    return 1.0 - forward(model, x).prob
