"""Principal component analysis over the completed feature matrix.

Fits on centered (optionally z-scored) columns using the population
covariance and the symmetric Jacobi eigensolver, exposes scree data
(eigenvalues, explained-variance ratios) and projection, and derives
the feature shortlist by crossing high-loading features with the
forest importance ranking.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .numeric import covariance_matrix, eigen_sym, mean_vector

log = logging.getLogger(__name__)


@dataclass
class PcaModel:
    """Eigenvalues descending; components stored as columns (component i
    is components[:, i]); scale is all-ones when fitted unstandardized."""

    mean: np.ndarray
    scale: np.ndarray
    eigenvalues: np.ndarray
    components: np.ndarray
    ratios: np.ndarray


def fit_pca(X, standardize: bool = True) -> PcaModel:
    """Center (and by default z-score) the columns, then eigendecompose
    the population covariance. Ratios are eigenvalue shares of the total."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("fit_pca needs an n x p matrix with n >= 2")
    mu = mean_vector(X)
    if standardize:
        var = mean_vector((X - mu) ** 2)
        if np.any(var == 0.0):
            dead = int(np.flatnonzero(var == 0.0)[0])
            raise ValueError(f"zero-variance column {dead} cannot be standardized")
        scale = np.sqrt(var)
    else:
        scale = np.ones(X.shape[1])
    Z = (X - mu) / scale
    decomp = eigen_sym(covariance_matrix(Z))
    total = decomp.values.sum()
    if total <= 0.0:
        raise ValueError("degenerate data: total variance is zero")
    return PcaModel(mu, scale, decomp.values, decomp.vectors, decomp.values / total)


def project(model: PcaModel, x, d: int) -> np.ndarray:
    """Coordinates of x (vector or row matrix) on the first d components."""
    p = model.mean.shape[0]
    if not 1 <= d <= p:
        raise ValueError(f"d must be in [1, {p}], got {d}")
    x = np.asarray(x, dtype=np.float64)
    z = (x - model.mean) / model.scale
    return z @ model.components[:, :d]


def select_dimension(model: PcaModel, threshold: float) -> int:
    """Smallest component count whose cumulative ratio reaches threshold.

    A 1e-12 slack absorbs float accumulation (e.g. 0.6+0.3 summing to
    0.8999...) so exact-fraction thresholds behave as written.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    cum = np.cumsum(model.ratios)
    hit = np.flatnonzero(cum >= threshold - 1e-12)
    return int(hit[0]) + 1 if hit.size else model.ratios.size


def top_loading_features(model: PcaModel, columns, d: int) -> list[str]:
    """For each of the first d components, the column with the largest
    absolute loading; duplicates collapse, first appearance order kept."""
    seen: list[str] = []
    for i in range(d):
        name = columns[int(np.argmax(np.abs(model.components[:, i])))]
        if name not in seen:
            seen.append(name)
    return seen


def feature_shortlist(model: PcaModel, rf_ranking, columns, threshold: float = 0.90, k: int = 4):
    """Features that both dominate a retained component and sit in the
    forest importance top-k; empty crossings fall back to the forest
    top-k with a warning. Returns names in rf_ranking order."""
    d = select_dimension(model, threshold)
    pca_side = set(top_loading_features(model, columns, d))
    top_k = list(rf_ranking)[:k]
    chosen = [name for name in top_k if name in pca_side]
    if not chosen:
        log.warning(
            "component-loading and forest-importance selections share no feature; "
            "falling back to the forest top-%d", k,
        )
        chosen = top_k
    return chosen
