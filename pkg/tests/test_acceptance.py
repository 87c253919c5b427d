"""Acceptance gate: seven numbered criteria, one verdict line each.

Each test appends "criterion N: PASS/FAIL - detail" to the summary that
conftest echoes after the run. Criteria 2, 4 and 5 share five full
pipeline runs (seeds 1-5) on the shipped laboratory CSV.
"""

import csv
import json
import math
import os
import time

import numpy as np
import pytest

import conftest
from hcvpipe import evaluation, mice, mlp, svm
from hcvpipe.dataset import FeatureTable, missingness_report, parse_csv, to_feature_table
from hcvpipe.evaluation import ConfusionMatrix, gini_coefficient, metrics, roc_curve, zero_one_error
from hcvpipe.forest import predict01 as forest_predict01
from hcvpipe.forest import train_forest
from hcvpipe.numeric import RngStream, eigen_sym
from hcvpipe.pipeline import PipelineConfig, run_pipeline

SEEDS = (1, 2, 3, 4, 5)
MARKER_SET = {"AST", "ALT", "ALP", "GGT"}


def record(n, ok, msg):
    verdict = "PASS" if ok else "FAIL"
    conftest.ACCEPTANCE_LINES.append(f"criterion {n}: {verdict} - {msg}")


def note(n, msg):
    conftest.ACCEPTANCE_LINES.append(f"criterion {n} note: {msg}")


def _warm_kernels():
    """Trigger kernel compilation/cache load outside any timed window."""
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 3))
    y = (X[:, 0] > 0).astype(np.int64)
    forest_predict01(train_forest(X, y, trees=2, seed=0), X)
    svm.train_svm(X, svm.to_pm_labels(y), C=1.0)
    mlp.train_mlp(X, y.astype(float), h=2, epochs=2, lr=0.05, seed=0)
    eigen_sym(np.cov(X.T))


@pytest.fixture(scope="module")
def pipeline_runs(hcv_csv, tmp_path_factory):
    _warm_kernels()
    runs = []
    for seed in SEEDS:
        out = tmp_path_factory.mktemp(f"accept_seed{seed}")
        cfg = PipelineConfig(data=hcv_csv, out=str(out), seed=seed)
        t0 = time.perf_counter()
        run_pipeline(cfg)
        runtime = time.perf_counter() - t0
        with open(out / "metrics.json") as fh:
            payload = json.load(fh)
        with open(out / "importance.csv", newline="") as fh:
            importance = list(csv.DictReader(fh))
        with open(out / "pca_model.json") as fh:
            pca_model = json.load(fh)
        runs.append({
            "seed": seed, "runtime": runtime, "metrics": payload,
            "importance": importance, "pca": pca_model,
        })
    return runs


def test_criterion_1_metrics_oracle():
    cells = {
        "ann": (493, 13, 2, 56),
        "svm": (495, 10, 0, 59),
        "rf": (488, 12, 7, 57),
    }
    published = {
        "ann": {"sensitivity": 0.9960, "specificity": 0.8116, "accuracy": 0.9734},
        "svm": {"sensitivity": 1.0000, "specificity": 0.8551, "accuracy": 0.9823},
        "rf": {"sensitivity": 0.9859, "specificity": 0.8261, "accuracy": 0.9663},
    }
    formula_f1 = {"ann": 986 / 1001, "svm": 990 / 1000, "rf": 976 / 995}
    published_f1 = {"ann": 0.9851, "svm": 0.9891, "rf": 0.9863}
    t0 = time.perf_counter()
    try:
        for name, (tp, fn, fp, tn) in cells.items():
            m = metrics(ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn))
            for key, want in published[name].items():
                got = getattr(m, key)
                assert abs(got - want) <= 5e-5, (name, key, got, want)
            assert m.f1 == pytest.approx(formula_f1[name], abs=1e-12), name
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
    except AssertionError:
        record(1, False, "metric oracle mismatch on the reference matrices")
        raise
    record(1, True, f"sens/spec/acc match to 4 decimals, F_1 at formula values, {elapsed * 1000:.0f} ms")
    for name in ("svm", "ann", "rf"):
        diff = formula_f1[name] - published_f1[name]
        note(1, f"{name} published F_1 {published_f1[name]:.4f} differs from "
                f"formula value {formula_f1[name]:.6f} by {diff:+.2e}")


def test_criterion_2_end_to_end(pipeline_runs):
    try:
        accs = {kind: [] for kind in ("svm", "ann", "rf")}
        for run in pipeline_runs:
            assert run["metrics"]["split"] == "cv"
            assert run["metrics"]["folds"] == 10
            baseline = run["metrics"]["baseline"]["accuracy"]
            assert baseline == pytest.approx(540 / 615, abs=1e-12)
            for kind in accs:
                acc = run["metrics"]["models"][kind]["metrics"]["accuracy"]
                accs[kind].append(acc)
                assert acc >= 0.93, (kind, run["seed"], acc)
                assert acc > 0.878, (kind, run["seed"], acc)
            assert 0.95 <= accs["svm"][-1] <= 1.00, (run["seed"], accs["svm"][-1])
            assert run["runtime"] < 60.0, (run["seed"], run["runtime"])
    except AssertionError:
        record(2, False, "pooled CV accuracy or runtime out of band")
        raise
    spans = ", ".join(
        f"{kind} {min(v):.4f}-{max(v):.4f}" for kind, v in accs.items()
    )
    slowest = max(r["runtime"] for r in pipeline_runs)
    record(2, True, f"5 seeds: {spans}, all > 0.878 baseline, slowest run {slowest:.1f}s")


def test_criterion_3_dataset_facts(hcv_csv):
    try:
        table = to_feature_table(parse_csv(hcv_csv))
        assert table.n_rows == 615
        assert int(np.sum(table.labels == 0)) == 540
        assert int(np.sum(table.labels == 1)) == 75
        got = {r.column: r.missing_count for r in missingness_report(table)
               if r.missing_count > 0}
        frozen = {"ALB": 1, "ALP": 18, "ALT": 1, "CHOL": 10, "PROT": 1}
        assert got == frozen, got
    except AssertionError:
        record(3, False, "row, label, or missing-cell counts off the frozen scan")
        raise
    record(3, True, "615 rows, 540/75 labels, missing cells ALB 1 ALP 18 ALT 1 CHOL 10 PROT 1")


def test_criterion_4_importance(pipeline_runs):
    try:
        hits = []
        for run in pipeline_runs:
            rows = sorted(run["importance"], key=lambda r: int(r["gini_rank"]))
            top5 = {r["feature"] for r in rows[:5]}
            hits.append(len(top5 & MARKER_SET))
        good_seeds = sum(1 for h in hits if h >= 3)
        assert good_seeds >= 4, hits
    except AssertionError:
        record(4, False, "gini top-5 misses the marker enzymes too often")
        raise
    record(4, True, f"top-5 holds >= 3 of AST/ALT/ALP/GGT in {good_seeds}/5 seeds (hits {hits})")


def test_criterion_5_pca(pipeline_runs):
    try:
        dims = []
        for run in pipeline_runs:
            pca = run["pca"]
            assert pca["standardize"] is True
            ratios = np.array(pca["ratios"], dtype=np.float64)
            assert abs(float(ratios.sum()) - 1.0) <= 1e-9
            d = int(pca["selected_dimension"])
            dims.append(d)
            assert d <= 8
            assert float(np.cumsum(ratios)[d - 1]) >= 0.90 - 1e-12
    except AssertionError:
        record(5, False, "explained-variance ratios or selected dimension out of bounds")
        raise
    record(5, True, f"ratios sum to 1 within 1e-9, 0.90 reached at d={sorted(set(dims))} of 12")


def test_criterion_6_property_suites():
    suite = "eigen residuals"
    try:
        rng = np.random.default_rng(60)
        worst = 0.0
        for _ in range(100):
            p = int(rng.integers(2, 13))
            A = rng.normal(size=(p, p))
            S = (A + A.T) / 2.0
            dec = eigen_sym(S)
            tol = 1e-9 * max(1.0, float(np.abs(S).max()))
            res = float(np.abs(S @ dec.vectors - dec.vectors * dec.values).max())
            worst = max(worst, res / tol)
            assert res <= tol

        suite = "mlp gradient check"
        rng = np.random.default_rng(61)
        for _ in range(100):
            h = int(rng.integers(1, 5))
            q = int(rng.integers(1, 5))
            n = int(rng.integers(2, 7))
            model = mlp.MlpModel(
                w1=rng.standard_normal((h, q)), b1=rng.standard_normal(h),
                w2=rng.standard_normal(h), b2=float(rng.standard_normal()),
                losses=np.empty(0),
            )
            X = rng.standard_normal((n, q))
            y = rng.integers(0, 2, n).astype(np.float64)
            _, grads = mlp.loss_and_gradients(model, X, y)
            eps = 1e-6
            for pname in ("w1", "b1", "w2", "b2"):
                ana = np.atleast_1d(np.asarray(grads[pname], dtype=np.float64)).reshape(-1)
                if pname == "b2":
                    flat = np.array([model.b2])
                else:
                    flat = getattr(model, pname).reshape(-1)
                num = np.empty(flat.size)
                for i in range(flat.size):
                    keep = flat[i]
                    flat[i] = keep + eps
                    if pname == "b2":
                        model.b2 = float(flat[0])
                    hi, _ = mlp.loss_and_gradients(model, X, y)
                    flat[i] = keep - eps
                    if pname == "b2":
                        model.b2 = float(flat[0])
                    lo, _ = mlp.loss_and_gradients(model, X, y)
                    flat[i] = keep
                    if pname == "b2":
                        model.b2 = float(keep)
                    num[i] = (hi - lo) / (2.0 * eps)
                rel = float(np.abs(num - ana).max()) / max(1.0, float(np.abs(ana).max()))
                assert rel <= 1e-5, (pname, rel)

        suite = "auc trapezoid vs pair counting"
        rng = np.random.default_rng(62)
        for trial in range(500):
            n = int(rng.integers(4, 40))
            scores = rng.random(n)
            if trial % 2:
                scores = np.round(scores, 1)  # force ties
            actual = rng.integers(0, 2, n)
            if len(np.unique(actual)) < 2:
                actual[0] = 1 - actual[0]
            auc = roc_curve(scores, actual).auc
            pos = scores[actual == 0]
            neg = scores[actual == 1]
            wins = sum(float(np.sum(s > neg)) + 0.5 * float(np.sum(s == neg)) for s in pos)
            assert abs(auc - wins / (pos.size * neg.size)) <= 1e-12, trial

        suite = "gini coefficient grid"
        for a in np.arange(0.0, 1.0 + 1e-12, 0.01):
            assert abs(gini_coefficient(float(a)) - (2.0 * a - 1.0)) <= 1e-12

        suite = "mice preservation and donor membership"
        rng = np.random.default_rng(63)
        for trial in range(100):
            n = int(rng.integers(12, 30))
            p = int(rng.integers(2, 5))
            vals = rng.standard_normal((n, p)) * 2.0 + 5.0
            mask = rng.random((n, p)) < 0.15
            mask[:2, :] = False
            table = FeatureTable(
                tuple(f"x{j}" for j in range(p)),
                np.where(mask, np.nan, vals), mask,
                np.zeros(n, dtype=np.int64), np.arange(n, dtype=np.int64),
            )
            result = mice.run_mice(table, mice.MiceConfig(cycles=2), RngStream(trial))
            np.testing.assert_array_equal(result.completed[~mask], vals[~mask])
            for j in range(p):
                col = mask[:, j]
                if not col.any():
                    continue
                donors = set(vals[~col, j])
                assert all(v in donors for v in result.completed[col, j])

        suite = "forest determinism across workers"
        rng = np.random.default_rng(64)
        X = rng.standard_normal((150, 5))
        y = (X[:, 1] > 0).astype(np.int64)
        counts = sorted({1, 2, max(os.cpu_count() or 1, 2)})
        preds = []
        for workers in counts:
            f = train_forest(X, y, trees=30, seed=5, workers=workers)
            preds.append(forest_predict01(f, X))
        for other in preds[1:]:
            np.testing.assert_array_equal(preds[0], other)

        suite = "xor separation"
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y01 = np.array([0, 1, 1, 0])
        pm = svm.to_pm_labels(y01)
        model = svm.train_svm(X, pm, C=10.0)
        linear_acc = float(np.mean(svm.predict01(model, X) == y01))
        assert linear_acc <= 0.75
        solved = 0
        for seed in range(5):
            net = mlp.train_mlp(X, y01.astype(float), h=4, epochs=2000, lr=0.5, seed=seed)
            if float(np.mean(mlp.predict_class(net, X) == y01)) == 1.0:
                solved += 1
        assert solved >= 1
    except AssertionError:
        record(6, False, f"property suite failed: {suite}")
        raise
    record(
        6, True,
        "all 7 suites green (eigen 100, gradcheck 100, auc 500, gini grid, "
        f"mice 100, workers {counts}, xor linear {linear_acc:.2f} / mlp {solved}/5)",
    )


def test_criterion_7_loss_consistency():
    try:
        tp, fn, fp, tn = 495, 10, 0, 59
        predicted = np.concatenate([np.zeros(tp + fn, dtype=int), np.ones(fp + tn, dtype=int)])
        actual = np.concatenate([
            np.zeros(tp, dtype=int), np.ones(fn, dtype=int),
            np.zeros(fp, dtype=int), np.ones(tn, dtype=int),
        ])
        err = zero_one_error(predicted, actual)
        assert abs(err - 0.0177) <= 5e-5, err
        assert err == pytest.approx(1.0 - metrics(
            ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)).accuracy, abs=1e-12)
    except AssertionError:
        record(7, False, "zero-one loss off the published 1.77%")
        raise
    record(7, True, f"zero-one error {err:.6f} = 10/564, within 5e-5 of 0.0177")
