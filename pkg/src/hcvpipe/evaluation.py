"""Evaluation machinery: confusion counts, the five summary metrics,
ROC/AUC, the Gini coefficient, 0-1 error, and cross-validation.

Orientation note: the positive class throughout is label 0 (blood
donor), and the confusion cells are laid out rows = predicted, columns
= actual. That layout names its off-diagonal cells (predicted 0,
actual 1) -> fn and (predicted 1, actual 0) -> fp, which swaps the
conventional FN/FP meanings. Every metric formula in this module is
written against these cell definitions, so sensitivity and specificity
must be read under the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forest as forest_mod
from . import mlp as mlp_mod
from . import svm as svm_mod
from .dataset import FeatureTable
from .numeric import RngStream, standardize_apply, standardize_fit


@dataclass
class ConfusionMatrix:
    tp: int  # predicted 0, actual 0
    fn: int  # predicted 0, actual 1
    fp: int  # predicted 1, actual 0
    tn: int  # predicted 1, actual 1

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass
class MetricSet:
    """Fractions in [0, 1]; a metric whose denominator is zero is None."""

    accuracy: float | None
    precision: float | None
    sensitivity: float | None
    specificity: float | None
    f1: float | None


@dataclass
class RocCurve:
    thresholds: np.ndarray  # +inf first; score cutoffs, descending
    points: np.ndarray  # (k, 2) rows of (fpr, tpr), starts (0,0), ends (1,1)
    auc: float


def confusion(predicted, actual) -> ConfusionMatrix:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValueError("predicted and actual must be equal-length vectors")
    if predicted.size == 0:
        raise ValueError("empty input")
    return ConfusionMatrix(
        tp=int(np.sum((predicted == 0) & (actual == 0))),
        fn=int(np.sum((predicted == 0) & (actual == 1))),
        fp=int(np.sum((predicted == 1) & (actual == 0))),
        tn=int(np.sum((predicted == 1) & (actual == 1))),
    )


def _ratio(num, den):
    return num / den if den > 0 else None


def metrics(cm: ConfusionMatrix) -> MetricSet:
    """The five summary metrics from the confusion cells."""
    if cm.total <= 0:
        raise ValueError("confusion matrix is empty")
    precision = _ratio(cm.tp, cm.tp + cm.fn)
    sensitivity = _ratio(cm.tp, cm.tp + cm.fp)
    f1 = None
    if precision is not None and sensitivity is not None and precision + sensitivity > 0:
        f1 = 2.0 * precision * sensitivity / (precision + sensitivity)
    return MetricSet(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        sensitivity=sensitivity,
        specificity=_ratio(cm.tn, cm.tn + cm.fn),
        f1=f1,
    )


def roc_curve(scores, actual) -> RocCurve:
    """Threshold sweep over distinct scores, descending; larger score
    means more class-0. TPR = share of actual-0 rows at or above the
    cutoff, FPR the same over actual-1 rows. AUC by trapezoid."""
    scores = np.asarray(scores, dtype=np.float64)
    actual = np.asarray(actual)
    if scores.shape != actual.shape or scores.ndim != 1:
        raise ValueError("scores and actual must be equal-length vectors")
    n_pos = int(np.sum(actual == 0))
    n_neg = int(np.sum(actual == 1))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes required for a ROC curve")
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    is_pos = (actual[order] == 0).astype(np.int64)
    tps = np.cumsum(is_pos)
    fps = np.cumsum(1 - is_pos)
    distinct = np.flatnonzero(np.append(s[1:] < s[:-1], True))
    thresholds = [np.inf]
    pts = [(0.0, 0.0)]
    for i in distinct:
        thresholds.append(s[i])
        pts.append((fps[i] / n_neg, tps[i] / n_pos))
    if pts[-1] != (1.0, 1.0):
        thresholds.append(-np.inf)
        pts.append((1.0, 1.0))
    points = np.array(pts)
    auc = float(np.trapezoid(points[:, 1], points[:, 0]))
    return RocCurve(np.array(thresholds), points, auc)


def gini_coefficient(auc: float) -> float:
    """2*AUC - 1."""
    if not 0.0 <= auc <= 1.0:
        raise ValueError("auc must lie in [0, 1]")
    return 2.0 * auc - 1.0


def zero_one_error(predicted, actual) -> float:
    """Misclassification rate."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise ValueError("predicted and actual must be equal-length nonempty vectors")
    return float(np.mean(predicted != actual))


def kfold_split(n: int, v: int, stratify_labels=None, seed=0) -> list[np.ndarray]:
    """Partition 0..n-1 into v folds with sizes differing by at most 1.

    With stratify_labels, each class is shuffled and dealt round-robin,
    starting each class at the fold where the previous class left off so
    the per-fold totals stay balanced.
    """
    if v < 2:
        raise ValueError("need at least 2 folds")
    if v > n:
        raise ValueError(f"cannot split {n} rows into {v} folds")
    rng = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    shuffle = rng.fork("kfold")
    folds: list[list[int]] = [[] for _ in range(v)]
    if stratify_labels is None:
        order = shuffle.permutation(n)
        for pos, row in enumerate(order):
            folds[pos % v].append(int(row))
    else:
        labels = np.asarray(stratify_labels)
        if labels.shape != (n,):
            raise ValueError("stratify_labels must have one entry per row")
        offset = 0
        for cls in np.unique(labels):
            rows = np.flatnonzero(labels == cls)
            rows = rows[shuffle.fork(f"class/{cls}").permutation(rows.size)]
            for pos, row in enumerate(rows):
                folds[(offset + pos) % v].append(int(row))
            offset += rows.size
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def fixed_split(n: int, train_size: int, stratify_labels=None, seed=0):
    """One stratified train/test split with exactly train_size training
    rows (largest-remainder allocation across classes)."""
    if not 1 <= train_size < n:
        raise ValueError("train_size must be in [1, n)")
    rng = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    shuffle = rng.fork("fixed-split")
    if stratify_labels is None:
        order = shuffle.permutation(n)
        train = order[:train_size]
        test = order[train_size:]
        return np.sort(train.astype(np.int64)), np.sort(test.astype(np.int64))
    labels = np.asarray(stratify_labels)
    classes = np.unique(labels)
    quota = {}
    remainders = []
    used = 0
    for cls in classes:
        exact = train_size * np.sum(labels == cls) / n
        quota[cls] = int(np.floor(exact))
        used += quota[cls]
        remainders.append((-(exact - np.floor(exact)), cls))
    for _, cls in sorted(remainders):
        if used == train_size:
            break
        quota[cls] += 1
        used += 1
    train_parts, test_parts = [], []
    for cls in classes:
        rows = np.flatnonzero(labels == cls)
        rows = rows[shuffle.fork(f"class/{cls}").permutation(rows.size)]
        train_parts.append(rows[: quota[cls]])
        test_parts.append(rows[quota[cls] :])
    train = np.sort(np.concatenate(train_parts).astype(np.int64))
    test = np.sort(np.concatenate(test_parts).astype(np.int64))
    return train, test


@dataclass
class ModelSpec:
    """One of "svm", "ann", "rf", or "baseline" plus hyperparameter
    overrides (svm: C, kernel, gamma; ann: hidden, epochs, lr; rf:
    trees, m, n_min, workers)."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("svm", "ann", "rf", "baseline"):
            raise ValueError(f"unknown model kind {self.kind!r}")


def fit_and_score(spec: ModelSpec, X_train, y_train, X_eval, rng: RngStream):
    """Standardize with training statistics, fit, and return
    (predictions, class-0 scores) for the evaluation rows."""
    mu, sd = standardize_fit(X_train)
    Ztr = standardize_apply(X_train, mu, sd)
    Zev = standardize_apply(X_eval, mu, sd)
    p = spec.params
    if spec.kind == "svm":
        model = svm_mod.train_svm(
            Ztr, svm_mod.to_pm_labels(y_train),
            C=p.get("C", 1.0), kernel=p.get("kernel", "linear"),
            gamma=p.get("gamma"), seed=rng,
        )
        return svm_mod.predict01(model, Zev), svm_mod.decision_value(model, Zev)
    if spec.kind == "ann":
        model = mlp_mod.train_mlp(
            Ztr, y_train, h=p.get("hidden", 8),
            epochs=p.get("epochs", 2000), lr=p.get("lr", 0.05), seed=rng,
        )
        return mlp_mod.predict_class(model, Zev), mlp_mod.class0_scores(model, Zev)
    if spec.kind == "rf":
        model = forest_mod.train_forest(
            Ztr, y_train, trees=p.get("trees", 500), m=p.get("m"),
            n_min=p.get("n_min", 1), seed=rng, workers=p.get("workers", 1),
        )
        return forest_mod.predict01(model, Zev), forest_mod.class0_scores(model, Zev)
    majority = 0 if np.sum(y_train == 0) >= np.sum(y_train == 1) else 1
    pred = np.full(X_eval.shape[0], majority, dtype=np.int64)
    return pred, np.full(X_eval.shape[0], 0.5)


@dataclass
class CvResult:
    folds: list[np.ndarray]
    fold_metrics: list[MetricSet]
    pooled: ConfusionMatrix
    pooled_metrics: MetricSet
    mean: dict
    sd: dict
    predictions: np.ndarray  # pooled held-out predictions, row-aligned
    scores: np.ndarray  # pooled held-out class-0 scores, row-aligned


def _mean_sd(fold_metrics):
    mean, sd = {}, {}
    for name in ("accuracy", "precision", "sensitivity", "specificity", "f1"):
        vals = [getattr(m, name) for m in fold_metrics if getattr(m, name) is not None]
        if vals:
            mean[name] = float(np.mean(vals))
            sd[name] = float(np.std(vals))
        else:
            mean[name] = sd[name] = None
    return mean, sd


def cross_validate(table: FeatureTable, spec: ModelSpec, v: int = 10, seed=0,
                   stratify: bool = True) -> CvResult:
    """v-fold CV: per fold, standardization and model are fit on the
    training folds only; held-out predictions pool into one confusion
    matrix in original row order."""
    if table.missing.any():
        raise ValueError("table still has missing cells; impute first")
    rng = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    n = table.n_rows
    labels = table.labels
    folds = kfold_split(n, v, labels if stratify else None, rng)
    predictions = np.empty(n, dtype=np.int64)
    scores = np.empty(n)
    fold_metrics = []
    for i, test_idx in enumerate(folds):
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        pred, sc = fit_and_score(
            spec,
            table.values[train_mask], labels[train_mask],
            table.values[test_idx], rng.fork(f"fold/{i}"),
        )
        predictions[test_idx] = pred
        scores[test_idx] = sc
        fold_metrics.append(metrics(confusion(pred, labels[test_idx])))
    pooled = confusion(predictions, labels)
    mean, sd = _mean_sd(fold_metrics)
    return CvResult(folds, fold_metrics, pooled, metrics(pooled), mean, sd,
                    predictions, scores)


@dataclass
class SplitResult:
    train_idx: np.ndarray
    test_idx: np.ndarray
    confusion: ConfusionMatrix
    metrics: MetricSet
    predictions: np.ndarray  # over test_idx
    scores: np.ndarray  # over test_idx


def evaluate_fixed(table: FeatureTable, spec: ModelSpec, train_size: int,
                   seed=0, stratify: bool = True) -> SplitResult:
    """Train once on a fixed-size stratified split, evaluate the rest."""
    if table.missing.any():
        raise ValueError("table still has missing cells; impute first")
    rng = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    train_idx, test_idx = fixed_split(
        table.n_rows, train_size, table.labels if stratify else None, rng
    )
    pred, sc = fit_and_score(
        spec,
        table.values[train_idx], table.labels[train_idx],
        table.values[test_idx], rng.fork("fixed/model"),
    )
    cm = confusion(pred, table.labels[test_idx])
    return SplitResult(train_idx, test_idx, cm, metrics(cm), pred, sc)
