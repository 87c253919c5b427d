"""Deterministic numeric kernels shared across the toolkit.

Conventions fixed here and relied on everywhere else:

* covariance uses divisor n (population form), not n-1;
* eigenvectors are returned with their largest-magnitude component
  positive, eigenvalues sorted descending;
* random streams are counter-based and keyed by (seed, label), so the
  same (seed, label) pair replays the same sequence on any platform and
  under any thread schedule.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import kernels


class EigenError(RuntimeError):
    """Jacobi iteration failed to reach the off-diagonal tolerance."""


@dataclass
class EigenDecomp:
    """Eigenvalues (descending) with matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


class RngStream:
    """Named, seeded random stream backed by the counter-based Philox
    generator.

    The stream key is a hash of (seed, label), so distinct labels give
    independent streams and the creation order of sibling streams never
    affects any stream's output. Fork child streams with :meth:`fork`
    rather than sharing one stream across units of work.
    """

    def __init__(self, seed: int, label: str = "root"):
        self.seed = int(seed)
        self.label = label
        digest = hashlib.sha256(f"{self.seed:#x}\x1f{label}".encode()).digest()
        key = int.from_bytes(digest[:16], "little")
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def fork(self, label: str) -> "RngStream":
        """Derive an independent child stream; pure function of (seed, labels)."""
        return RngStream(self.seed, f"{self.label}/{label}")

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return self._gen.uniform(low, high, size)

    def permutation(self, n: int):
        return self._gen.permutation(n)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


def mean_vector(X) -> np.ndarray:
    """Componentwise arithmetic mean of the rows of X (n >= 1)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("mean_vector needs a nonempty 2-D matrix")
    return X.sum(axis=0) / X.shape[0]


def covariance_matrix(X, centered: bool = False) -> np.ndarray:
    """Population covariance S = (1/n) sum of outer products of centered rows.

    Divisor is n, not n-1. Result is exactly symmetric.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("covariance_matrix needs a nonempty 2-D matrix")
    if not centered:
        X = X - mean_vector(X)
    S = X.T @ X / X.shape[0]
    return (S + S.T) / 2.0


def pearson_corr_matrix(X, columns=None) -> np.ndarray:
    """Pearson correlation matrix; unit diagonal, entries clipped to [-1, 1].

    Raises ValueError naming the offending column when a column has zero
    variance.
    """
    X = np.asarray(X, dtype=np.float64)
    S = covariance_matrix(X)
    sd = np.sqrt(np.diag(S))
    bad = np.nonzero(sd == 0.0)[0]
    if bad.size:
        name = columns[bad[0]] if columns is not None else f"column {bad[0]}"
        raise ValueError(f"zero-variance column: {name}")
    R = S / np.outer(sd, sd)
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


@dataclass
class OlsFit:
    """Least-squares coefficients (intercept first) and whether the ridge
    fallback fired on a singular normal system."""

    coef: np.ndarray
    used_ridge: bool


def ols_fit(X, y) -> OlsFit:
    """Ordinary least squares of y on X plus an intercept.

    Solves the normal equations; on a singular or non-finite solve, retries
    with ridge term 1e-8 * trace(X'X)/q and reports it via used_ridge.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    A = np.hstack([np.ones((n, 1)), X])
    G = A.T @ A
    c = A.T @ y
    used_ridge = False
    try:
        beta = np.linalg.solve(G, c)
        if not np.all(np.isfinite(beta)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        used_ridge = True
        lam = 1e-8 * np.trace(G) / G.shape[0]
        if lam <= 0.0:
            lam = 1e-8
        beta = np.linalg.solve(G + lam * np.eye(G.shape[0]), c)
    return OlsFit(beta, used_ridge)


def ols_predict(fit: OlsFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return fit.coef[0] + X @ fit.coef[1:]


def eigen_sym(S, max_sweeps: int = 100) -> EigenDecomp:
    """Symmetric eigendecomposition via cyclic Jacobi rotations.

    Eigenvalues sorted descending; each eigenvector's largest-magnitude
    component is made positive so decompositions are reproducible.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("eigen_sym needs a square matrix")
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(S).max(initial=0.0))):
        raise ValueError("eigen_sym needs a symmetric matrix")
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    tol = 1e-12 * scale
    vals, vecs, off, _ = kernels.jacobi_eigh(S, tol, max_sweeps)
    if off > tol:
        raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps; off-diagonal residual {off:.3e}")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        lead = np.argmax(np.abs(vecs[:, k]))
        if vecs[lead, k] < 0.0:
            vecs[:, k] = -vecs[:, k]
    return EigenDecomp(vals, vecs)


def quantile(xs, q: float) -> float:
    """Linear-interpolation quantile of xs at fraction q in [0, 1]."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("quantile of empty input")
    if not 0.0 <= q <= 1.0:
        raise ValueError("quantile fraction must be in [0, 1]")
    s = np.sort(xs)
    pos = q * (s.size - 1)
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    if lo == hi:
        return float(s[lo])
    frac = pos - lo
    return float(s[lo] * (1.0 - frac) + s[hi] * frac)


def standardize_fit(X):
    """Per-column mean and population standard deviation (zero sd -> 1)."""
    X = np.asarray(X, dtype=np.float64)
    mu = mean_vector(X)
    var = mean_vector((X - mu) ** 2)
    sd = np.sqrt(var)
    sd = np.where(sd == 0.0, 1.0, sd)
    return mu, sd


def standardize_apply(X, mu, sd):
    return (np.asarray(X, dtype=np.float64) - mu) / sd
