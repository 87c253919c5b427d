"""Exploratory statistics on the completed table: Tukey box/whisker
summaries with outlier lists, and the feature/label correlation matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureTable
from .numeric import pearson_corr_matrix, quantile

WHISKER_FACTOR = 1.5


@dataclass
class BoxStats:
    column: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_low: float
    whisker_high: float
    outliers: list[tuple[int, float]]  # (row index, value)


def _require_complete(table: FeatureTable):
    if table.missing.any():
        raise ValueError("table still has missing cells; impute first")


def box_stats(table: FeatureTable) -> list[BoxStats]:
    """Five-number summary per feature with 1.5*IQR whiskers.

    Whiskers sit on the most extreme data points inside the fences;
    every value outside them is reported as (row, value), in row order.
    """
    _require_complete(table)
    out = []
    for j, name in enumerate(table.columns):
        col = table.values[:, j]
        q1 = quantile(col, 0.25)
        q2 = quantile(col, 0.50)
        q3 = quantile(col, 0.75)
        iqr = q3 - q1
        lo_fence = q1 - WHISKER_FACTOR * iqr
        hi_fence = q3 + WHISKER_FACTOR * iqr
        inside = col[(col >= lo_fence) & (col <= hi_fence)]
        # fences always contain the quartiles, so inside is never empty
        wlo = float(inside.min())
        whi = float(inside.max())
        outliers = [
            (int(i), float(col[i]))
            for i in np.flatnonzero((col < lo_fence) | (col > hi_fence))
        ]
        out.append(
            BoxStats(name, float(col.min()), q1, q2, q3, float(col.max()), wlo, whi, outliers)
        )
    return out


def corr_report(table: FeatureTable) -> tuple[tuple[str, ...], np.ndarray]:
    """Pearson matrix over the features plus the label as a final
    pseudo-column; returns (names, (p+1)x(p+1) matrix)."""
    _require_complete(table)
    names = table.columns + ("Label",)
    data = np.column_stack([table.values, table.labels.astype(np.float64)])
    return names, pearson_corr_matrix(data, columns=names)
