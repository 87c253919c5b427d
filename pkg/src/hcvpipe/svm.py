"""Soft-margin support vector classifier.

Labels follow the blood-donor convention: class 0 (donor) maps to +1,
class 1 (disease) to -1, and the decision rule is sign(<w,x> + bias)
with an exact zero counted as +1. Training solves the dual by
sequential minimal optimization with maximal-violating-pair selection
(see kernels._impl.smo_solve); the solver is deterministic, the seed
argument only pins the interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

KKT_TOL = 1e-3


@dataclass
class SvmModel:
    w: np.ndarray | None  # linear kernel only
    bias: float
    C: float
    kernel: str  # "linear" or "rbf"
    gamma: float | None
    support_idx: np.ndarray
    alpha: np.ndarray  # dual coefficients at support_idx
    support_vectors: np.ndarray
    support_labels: np.ndarray
    iterations: int


def to_pm_labels(labels01) -> np.ndarray:
    """{0,1} class labels -> {+1,-1}: donors (0) are the positive class."""
    labels01 = np.asarray(labels01)
    return np.where(labels01 == 0, 1.0, -1.0)


def from_pm_labels(labels_pm) -> np.ndarray:
    """Inverse of to_pm_labels."""
    labels_pm = np.asarray(labels_pm)
    return np.where(labels_pm > 0, 0, 1).astype(np.int64)


def _gram(X, Z, kernel, gamma):
    if kernel == "linear":
        return X @ Z.T
    sq = (X**2).sum(axis=1)[:, None] + (Z**2).sum(axis=1)[None, :] - 2.0 * (X @ Z.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def train_svm(X, y, C: float = 1.0, kernel: str = "linear", gamma: float | None = None,
              seed: int = 0) -> SvmModel:
    """Fit on X with labels y in {+1,-1}.

    Stops when the KKT gap falls under 1e-3 or after 10*n pair updates.
    gamma defaults to 1/q for the rbf kernel.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be n x q with one label per row")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite features")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be +1/-1 (see to_pm_labels)")
    if np.all(y > 0) or np.all(y < 0):
        raise ValueError("single-class input: both classes required")
    if C <= 0:
        raise ValueError("C must be positive")
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if kernel == "rbf" and gamma is None:
        gamma = 1.0 / X.shape[1]

    K = _gram(X, X, kernel, gamma)
    alpha, bias, iters, _ = kernels.smo_solve(K, y, float(C), KKT_TOL, 10 * X.shape[0])
    sv = np.flatnonzero(alpha > 1e-8 * C)
    w = X.T @ (alpha * y) if kernel == "linear" else None
    return SvmModel(
        w=w,
        bias=float(bias),
        C=float(C),
        kernel=kernel,
        gamma=gamma,
        support_idx=sv,
        alpha=alpha[sv],
        support_vectors=X[sv],
        support_labels=y[sv],
        iterations=int(iters),
    )


def decision_value(model: SvmModel, x):
    """<w,x> + bias (linear) or the kernel expansion over support vectors
    (rbf); accepts a single point or a matrix of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    q = model.support_vectors.shape[1]
    if pts.shape[1] != q:
        raise ValueError(f"expected {q} features, got {pts.shape[1]}")
    if model.kernel == "linear":
        vals = pts @ model.w + model.bias
    else:
        Kq = _gram(model.support_vectors, pts, "rbf", model.gamma)
        vals = (model.alpha * model.support_labels) @ Kq + model.bias
    return float(vals[0]) if single else vals


def predict_sign(model: SvmModel, x):
    """sign of the decision value; an exact zero counts as +1."""
    vals = decision_value(model, x)
    if np.isscalar(vals):
        return 1 if vals >= 0.0 else -1
    return np.where(np.asarray(vals) >= 0.0, 1, -1)


def predict01(model: SvmModel, x):
    """Decision mapped back to {0,1} labels (0 = donor side)."""
    return from_pm_labels(predict_sign(model, x))
