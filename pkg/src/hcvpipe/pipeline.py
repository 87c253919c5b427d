"""Pipeline stages and artifact plumbing.

Each stage reads its inputs from the shared output directory and writes
its own artifacts, so running the stages one by one is byte-identical
to the one-shot pipeline command (which simply calls them in order).
Nothing here stores timestamps; every artifact is a pure function of
the configuration, the data file, and the package versions echoed in
run_meta.json.

Stage layout:
  ingest   -> records.csv, missingness.csv
  impute   -> completed.csv, mice_trace.csv
  explore  -> boxstats.csv, corr.csv
  pca      -> scree.csv, loadings.csv, pca_model.json
  train    -> importance.csv, features.json, model_* files, loss_ann.csv
  evaluate -> metrics.json, table1.csv, confusion.csv, roc_<model>.csv
Every stage also (re)writes run_meta.json, which is config-determined,
so repeated writes are idempotent.

Feature selection and PCA run on the full completed matrix before any
split, mirroring the source method's flow; per-fold standardization
inside the evaluators is the only train-only preprocessing.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, evaluation, explore, forest, kernels, mice, mlp, pca, svm
from .dataset import (
    FEATURE_COLUMNS,
    FeatureTable,
    missingness_report,
    parse_csv,
    to_feature_table,
)
from .numeric import RngStream, standardize_apply, standardize_fit

MODEL_KINDS = ("svm", "ann", "rf")


class PipelineError(RuntimeError):
    """Raised for config problems and missing upstream artifacts."""


@dataclass
class PipelineConfig:
    data: str
    out: str
    seed: int = 0
    folds: int = 10
    split: str = "cv"  # "cv" or "fixed"
    train_size: int = 564
    models: tuple = MODEL_KINDS
    pca_threshold: float = 0.90
    features: str = "shortlist"  # "shortlist", "all", or comma list of names
    mice_cycles: int = 10
    mice_donors: int = 5
    standardize: bool = True  # PCA scaling; models always standardize per fold
    stratify: bool = True
    fmt: str = "csv"
    svg: bool = False

    def __post_init__(self):
        if self.split not in ("cv", "fixed"):
            raise PipelineError(f"split must be cv or fixed, got {self.split!r}")
        if self.fmt not in ("csv", "json"):
            raise PipelineError(f"format must be csv or json, got {self.fmt!r}")
        if self.folds < 2:
            raise PipelineError("folds must be >= 2")
        bad = [m for m in self.models if m not in MODEL_KINDS]
        if bad:
            raise PipelineError(f"unknown model(s) {bad}; choose from {MODEL_KINDS}")
        if self.features not in ("shortlist", "all"):
            names = [f.strip() for f in self.features.split(",") if f.strip()]
            unknown = [f for f in names if f not in FEATURE_COLUMNS]
            if not names or unknown:
                raise PipelineError(
                    f"--features must be shortlist, all, or feature names; bad: {unknown or self.features!r}"
                )

    def echo(self) -> dict:
        d = asdict(self)
        d["models"] = list(self.models)
        return d


# ---------------------------------------------------------------- file helpers

def _path(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.out, name)


def _table_path(cfg: PipelineConfig, stem: str) -> str:
    return _path(cfg, f"{stem}.{cfg.fmt}")


def _fmt(x) -> str:
    # repr of a python float is the shortest exact round-trip form
    return repr(float(x))


def write_table(path: str, header, rows):
    """Write a report table as CSV or JSON depending on the extension;
    cells are already strings."""
    if path.endswith(".json"):
        payload = {"columns": list(header), "rows": [list(r) for r in rows]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path: str, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _need(cfg: PipelineConfig, name: str, producer: str) -> str:
    p = _path(cfg, name)
    if not os.path.exists(p):
        raise PipelineError(f"missing upstream artifact {name}; run the {producer} step first")
    return p


def _write_feature_csv(path: str, table: FeatureTable):
    header = ["id", "Label"] + list(table.columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(table.n_rows):
            row = [int(table.ids[i]), int(table.labels[i])]
            for j in range(len(table.columns)):
                row.append("NA" if table.missing[i, j] else _fmt(table.values[i, j]))
            w.writerow(row)


def _read_feature_csv(path: str) -> FeatureTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = tuple(header[2:])
        ids, labels, values, missing = [], [], [], []
        for row in reader:
            ids.append(int(row[0]))
            labels.append(int(row[1]))
            vals, miss = [], []
            for cell in row[2:]:
                if cell == "NA":
                    vals.append(np.nan)
                    miss.append(True)
                else:
                    vals.append(float(cell))
                    miss.append(False)
            values.append(vals)
            missing.append(miss)
    return FeatureTable(
        columns,
        np.array(values, dtype=np.float64),
        np.array(missing, dtype=bool),
        np.array(labels, dtype=np.int64),
        np.array(ids, dtype=np.int64),
    )


def write_run_meta(cfg: PipelineConfig):
    meta = {
        "config": cfg.echo(),
        "versions": {
            "hcvpipe": __version__,
            "numpy": np.__version__,
            "kernel_backend": kernels.backend_name(),
        },
    }
    _write_json(_path(cfg, "run_meta.json"), meta)


# --------------------------------------------------------------------- stages

def stage_ingest(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    records = parse_csv(cfg.data)
    table = to_feature_table(records)
    _write_feature_csv(_path(cfg, "records.csv"), table)
    rows = [
        [r.column, r.missing_count, _fmt(r.observed_mean), _fmt(r.observed_min), _fmt(r.observed_max)]
        for r in missingness_report(table)
    ]
    write_table(
        _table_path(cfg, "missingness"),
        ["column", "missing_count", "observed_mean", "observed_min", "observed_max"],
        rows,
    )
    return table


def stage_impute(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    table = _read_feature_csv(_need(cfg, "records.csv", "ingest"))
    mcfg = mice.MiceConfig(cycles=cfg.mice_cycles, donors=cfg.mice_donors)
    result = mice.run_mice(table, mcfg, RngStream(cfg.seed))
    completed = FeatureTable(
        table.columns, result.completed, np.zeros_like(table.missing),
        table.labels, table.ids,
    )
    _write_feature_csv(_path(cfg, "completed.csv"), completed)
    trace_rows = [
        [int(i), table.columns[j], cycle + 1, _fmt(v)]
        for (i, j), values in sorted(result.trace.items())
        for cycle, v in enumerate(values)
    ]
    write_table(_table_path(cfg, "mice_trace"), ["row", "column", "cycle", "value"], trace_rows)
    return completed


def stage_explore(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    table = _read_feature_csv(_need(cfg, "completed.csv", "impute"))
    stats = explore.box_stats(table)
    rows = [
        [
            s.column, _fmt(s.min), _fmt(s.q1), _fmt(s.median), _fmt(s.q3), _fmt(s.max),
            _fmt(s.whisker_low), _fmt(s.whisker_high), len(s.outliers),
            ";".join(str(r) for r, _ in s.outliers),
        ]
        for s in stats
    ]
    write_table(
        _table_path(cfg, "boxstats"),
        ["column", "min", "q1", "median", "q3", "max",
         "whisker_low", "whisker_high", "n_outliers", "outlier_rows"],
        rows,
    )
    names, corr = explore.corr_report(table)
    corr_rows = [[names[i]] + [_fmt(v) for v in corr[i]] for i in range(len(names))]
    write_table(_table_path(cfg, "corr"), [""] + list(names), corr_rows)
    if cfg.svg:
        from . import _svg

        _svg.box_plot(stats, _path(cfg, "boxplots.svg"))
        _svg.corr_heatmap(names, corr, _path(cfg, "corr.svg"))
    return stats


def stage_pca(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    table = _read_feature_csv(_need(cfg, "completed.csv", "impute"))
    model = pca.fit_pca(table.values, standardize=cfg.standardize)
    d = pca.select_dimension(model, cfg.pca_threshold)
    cum = np.cumsum(model.ratios)
    scree_rows = [
        [i + 1, _fmt(model.eigenvalues[i]), _fmt(model.ratios[i]), _fmt(cum[i])]
        for i in range(model.ratios.size)
    ]
    write_table(_table_path(cfg, "scree"), ["component", "eigenvalue", "ratio", "cumulative"], scree_rows)
    load_rows = [
        [table.columns[j]] + [_fmt(model.components[j, i]) for i in range(model.components.shape[1])]
        for j in range(len(table.columns))
    ]
    write_table(
        _table_path(cfg, "loadings"),
        ["feature"] + [f"component_{i+1}" for i in range(model.components.shape[1])],
        load_rows,
    )
    _write_json(_path(cfg, "pca_model.json"), {
        "standardize": cfg.standardize,
        "threshold": cfg.pca_threshold,
        "selected_dimension": d,
        "columns": list(table.columns),
        "mean": model.mean.tolist(),
        "scale": model.scale.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "ratios": model.ratios.tolist(),
        "components": model.components.tolist(),
    })
    if cfg.svg:
        from . import _svg

        _svg.scree_plot(model.eigenvalues, model.ratios, _path(cfg, "scree.svg"))
    return model


def _load_pca_model(cfg: PipelineConfig):
    path = _need(cfg, "pca_model.json", "pca")
    with open(path) as fh:
        raw = json.load(fh)
    model = pca.PcaModel(
        mean=np.array(raw["mean"]),
        scale=np.array(raw["scale"]),
        eigenvalues=np.array(raw["eigenvalues"]),
        components=np.array(raw["components"]),
        ratios=np.array(raw["ratios"]),
    )
    return model, raw


def _training_partition(cfg: PipelineConfig, table: FeatureTable):
    """Rows the final models train on: everything under CV, the fixed
    train split otherwise (same stream labels as evaluation)."""
    if cfg.split == "cv":
        return np.arange(table.n_rows, dtype=np.int64)
    train_idx, _ = evaluation.fixed_split(
        table.n_rows, cfg.train_size,
        table.labels if cfg.stratify else None,
        RngStream(cfg.seed).fork("fixed"),
    )
    return train_idx


def select_features(cfg: PipelineConfig, table: FeatureTable, pca_model, gini_ranking):
    """Resolve the configured feature-selection mode to column names."""
    if cfg.features == "all":
        return list(table.columns), {"mode": "all"}
    if cfg.features != "shortlist":
        names = [f.strip() for f in cfg.features.split(",") if f.strip()]
        return names, {"mode": "explicit"}
    d = pca.select_dimension(pca_model, cfg.pca_threshold)
    pca_side = pca.top_loading_features(pca_model, table.columns, d)
    rank_names = [table.columns[j] for j, _ in gini_ranking]
    chosen = pca.feature_shortlist(pca_model, rank_names, table.columns, cfg.pca_threshold)
    audit = {
        "mode": "shortlist",
        "pca_top_loadings": pca_side,
        "rf_importance_order": rank_names,
        "retained_components": d,
    }
    return chosen, audit


def stage_train(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    table = _read_feature_csv(_need(cfg, "completed.csv", "impute"))
    pca_model, _ = _load_pca_model(cfg)
    root = RngStream(cfg.seed)

    # importance comes from a forest over every feature on the full data
    mu, sd = standardize_fit(table.values)
    Z = standardize_apply(table.values, mu, sd)
    sel_forest = forest.train_forest(Z, table.labels, seed=root.fork("selection-forest"))
    gini_ranking = forest.importance_gini(sel_forest)
    perm_ranking = forest.importance_permutation(
        sel_forest, Z, table.labels, root.fork("perm-importance")
    )
    perm_by_feature = dict(perm_ranking)
    imp_rows = [
        [table.columns[j], _fmt(v), _fmt(perm_by_feature[j]), rank + 1]
        for rank, (j, v) in enumerate(gini_ranking)
    ]
    write_table(
        _table_path(cfg, "importance"),
        ["feature", "mean_decrease_gini", "mean_decrease_accuracy", "gini_rank"],
        imp_rows,
    )

    selected, audit = select_features(cfg, table, pca_model, gini_ranking)
    audit["selected"] = selected
    _write_json(_path(cfg, "features.json"), audit)

    cols = [table.columns.index(f) for f in selected]
    train_idx = _training_partition(cfg, table)
    X = table.values[np.ix_(train_idx, cols)]
    y = table.labels[train_idx]
    mu, sd = standardize_fit(X)
    Zt = standardize_apply(X, mu, sd)

    if "svm" in cfg.models:
        model = svm.train_svm(Zt, svm.to_pm_labels(y), seed=root.fork("final/svm"))
        _write_json(_path(cfg, "model_svm.json"), {
            "kernel": model.kernel, "C": model.C, "gamma": model.gamma,
            "bias": model.bias,
            "w": None if model.w is None else model.w.tolist(),
            "support_count": int(model.support_idx.size),
            "support_idx": model.support_idx.tolist(),
            "alpha": model.alpha.tolist(),
            "support_vectors": model.support_vectors.tolist(),
            "support_labels": model.support_labels.tolist(),
            "features": selected, "standardize_mean": mu.tolist(),
            "standardize_sd": sd.tolist(),
        })
    if "ann" in cfg.models:
        model = mlp.train_mlp(Zt, y, seed=root.fork("final/ann"))
        _write_json(_path(cfg, "model_ann.json"), {
            "hidden": int(model.w1.shape[0]),
            "w1": model.w1.tolist(), "b1": model.b1.tolist(),
            "w2": model.w2.tolist(), "b2": model.b2,
            "final_loss": float(model.losses[-1]),
            "features": selected, "standardize_mean": mu.tolist(),
            "standardize_sd": sd.tolist(),
        })
        write_table(
            _table_path(cfg, "loss_ann"),
            ["epoch", "loss"],
            [[e + 1, _fmt(v)] for e, v in enumerate(model.losses)],
        )
    if "rf" in cfg.models:
        model = forest.train_forest(Zt, y, seed=root.fork("final/rf"))
        rf_dir = _path(cfg, "model_rf")
        os.makedirs(rf_dir, exist_ok=True)
        for name in ("feature", "threshold", "left", "right", "counts", "leaf_class", "roots", "sizes"):
            np.save(os.path.join(rf_dir, f"{name}.npy"), getattr(model, name))
        _write_json(os.path.join(rf_dir, "meta.json"), {
            "trees": model.n_trees, "m": model.m, "n_min": model.n_min,
            "n_features": model.n_features, "features": selected,
            "standardize_mean": mu.tolist(), "standardize_sd": sd.tolist(),
        })
    if cfg.svg:
        from . import _svg

        _svg.importance_bars(
            [(table.columns[j], v) for j, v in gini_ranking],
            _path(cfg, "importance.svg"),
        )


def _require_model_files(cfg: PipelineConfig):
    for kind in cfg.models:
        name = "model_rf/meta.json" if kind == "rf" else f"model_{kind}.json"
        if not os.path.exists(_path(cfg, name)):
            raise PipelineError(f"missing model file {name}; run the train step first")


def _load_models(cfg: PipelineConfig):
    """Rebuild the trained models and their preprocessing from disk."""
    out = {}
    for kind in cfg.models:
        if kind == "svm":
            with open(_path(cfg, "model_svm.json")) as fh:
                raw = json.load(fh)
            model = svm.SvmModel(
                w=None if raw["w"] is None else np.array(raw["w"]),
                bias=raw["bias"], C=raw["C"],
                kernel=raw["kernel"], gamma=raw["gamma"],
                support_idx=np.array(raw["support_idx"], dtype=np.int64),
                alpha=np.array(raw["alpha"]),
                support_vectors=np.array(raw["support_vectors"]),
                support_labels=np.array(raw["support_labels"]),
                iterations=0,
            )
        elif kind == "ann":
            with open(_path(cfg, "model_ann.json")) as fh:
                raw = json.load(fh)
            model = mlp.MlpModel(
                w1=np.array(raw["w1"]), b1=np.array(raw["b1"]),
                w2=np.array(raw["w2"]), b2=raw["b2"], losses=np.empty(0),
            )
        else:
            rf_dir = _path(cfg, "model_rf")
            with open(os.path.join(rf_dir, "meta.json")) as fh:
                raw = json.load(fh)
            arrays = {
                name: np.load(os.path.join(rf_dir, f"{name}.npy"))
                for name in ("feature", "threshold", "left", "right", "counts",
                             "leaf_class", "roots", "sizes")
            }
            model = forest.Forest(
                oob=[], n_features=raw["n_features"], m=raw["m"], n_min=raw["n_min"],
                **arrays,
            )
        out[kind] = {
            "model": model,
            "features": raw["features"],
            "mu": np.array(raw["standardize_mean"]),
            "sd": np.array(raw["standardize_sd"]),
        }
    return out


def _model_scores(kind, loaded, X):
    Z = standardize_apply(X, loaded["mu"], loaded["sd"])
    model = loaded["model"]
    if kind == "svm":
        return svm.predict01(model, Z), svm.decision_value(model, Z)
    if kind == "ann":
        return mlp.predict_class(model, Z), mlp.class0_scores(model, Z)
    return forest.predict01(model, Z), forest.class0_scores(model, Z)


def stage_evaluate(cfg: PipelineConfig):
    os.makedirs(cfg.out, exist_ok=True)
    write_run_meta(cfg)
    table = _read_feature_csv(_need(cfg, "completed.csv", "impute"))
    _require_model_files(cfg)
    _need(cfg, "features.json", "train")
    with open(_path(cfg, "features.json")) as fh:
        selected = json.load(fh)["selected"]
    cols = [table.columns.index(f) for f in selected]
    sub = FeatureTable(
        tuple(selected), table.values[:, cols], table.missing[:, cols],
        table.labels, table.ids,
    )
    root = RngStream(cfg.seed)

    per_model = {}
    if cfg.split == "cv":
        for kind in cfg.models:
            spec = evaluation.ModelSpec(kind)
            res = evaluation.cross_validate(
                sub, spec, v=cfg.folds, seed=root.fork("cv"), stratify=cfg.stratify
            )
            roc = evaluation.roc_curve(res.scores, sub.labels)
            per_model[kind] = {
                "confusion": res.pooled, "metrics": res.pooled_metrics,
                "fold_mean": res.mean, "fold_sd": res.sd, "roc": roc,
                "zero_one": evaluation.zero_one_error(res.predictions, sub.labels),
            }
        base = evaluation.cross_validate(
            sub, evaluation.ModelSpec("baseline"), v=cfg.folds,
            seed=root.fork("cv"), stratify=cfg.stratify,
        )
        baseline = {"accuracy": base.pooled_metrics.accuracy}
    else:
        train_idx, test_idx = evaluation.fixed_split(
            sub.n_rows, cfg.train_size,
            sub.labels if cfg.stratify else None, root.fork("fixed"),
        )
        loaded = _load_models(cfg)
        for kind in cfg.models:
            pred, scores = _model_scores(kind, loaded[kind], sub.values[test_idx])
            cm = evaluation.confusion(pred, sub.labels[test_idx])
            roc = evaluation.roc_curve(scores, sub.labels[test_idx])
            per_model[kind] = {
                "confusion": cm, "metrics": evaluation.metrics(cm),
                "fold_mean": None, "fold_sd": None, "roc": roc,
                "zero_one": evaluation.zero_one_error(pred, sub.labels[test_idx]),
            }
        maj = 0 if np.sum(sub.labels[train_idx] == 0) >= np.sum(sub.labels[train_idx] == 1) else 1
        base_acc = float(np.mean(sub.labels[test_idx] == maj))
        baseline = {"accuracy": base_acc}

    payload = {
        "split": cfg.split,
        "folds": cfg.folds if cfg.split == "cv" else None,
        "train_size": cfg.train_size if cfg.split == "fixed" else None,
        "features": selected,
        "baseline": baseline,
        "models": {},
        "notes": [],
    }
    for kind, r in per_model.items():
        cm = r["confusion"]
        m = r["metrics"]
        payload["models"][kind] = {
            "confusion": {"tp": cm.tp, "fn": cm.fn, "fp": cm.fp, "tn": cm.tn},
            "metrics": {
                "accuracy": m.accuracy, "precision": m.precision,
                "sensitivity": m.sensitivity, "specificity": m.specificity, "f1": m.f1,
            },
            "fold_mean": r["fold_mean"], "fold_sd": r["fold_sd"],
            "auc": r["roc"].auc,
            "gini_coefficient": evaluation.gini_coefficient(r["roc"].auc),
            "zero_one_error": r["zero_one"],
        }
        write_table(
            _table_path(cfg, f"roc_{kind}"),
            ["threshold", "fpr", "tpr"],
            [
                [_fmt(r["roc"].thresholds[i]), _fmt(r["roc"].points[i, 0]), _fmt(r["roc"].points[i, 1])]
                for i in range(r["roc"].points.shape[0])
            ],
        )
    _write_json(_path(cfg, "metrics.json"), payload)

    metric_names = ["Sensitivity", "Specificity", "Accuracy", "F_1"]
    attr = {"Sensitivity": "sensitivity", "Specificity": "specificity",
            "Accuracy": "accuracy", "F_1": "f1"}
    t1_rows = []
    for name in metric_names:
        row = [name]
        for kind in cfg.models:
            v = getattr(per_model[kind]["metrics"], attr[name])
            row.append("" if v is None else f"{v:.4f}")
        t1_rows.append(row)
    write_table(_table_path(cfg, "table1"), ["metric"] + list(cfg.models), t1_rows)

    cm_rows = [
        [kind, per_model[kind]["confusion"].tp, per_model[kind]["confusion"].fn,
         per_model[kind]["confusion"].fp, per_model[kind]["confusion"].tn]
        for kind in cfg.models
    ]
    write_table(
        _table_path(cfg, "confusion"),
        ["model", "pred0_actual0", "pred0_actual1", "pred1_actual0", "pred1_actual1"],
        cm_rows,
    )
    if cfg.svg:
        from . import _svg

        _svg.roc_plot(
            {kind: per_model[kind]["roc"] for kind in cfg.models}, _path(cfg, "roc.svg")
        )
    return payload


def run_pipeline(cfg: PipelineConfig):
    """All stages in order on the shared output directory."""
    stage_ingest(cfg)
    stage_impute(cfg)
    stage_explore(cfg)
    stage_pca(cfg)
    stage_train(cfg)
    return stage_evaluate(cfg)
