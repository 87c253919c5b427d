import numpy as np
import pytest

from hcvpipe.dataset import FeatureTable
from hcvpipe.evaluation import (
    ConfusionMatrix,
    ModelSpec,
    confusion,
    cross_validate,
    evaluate_fixed,
    fixed_split,
    gini_coefficient,
    kfold_split,
    metrics,
    roc_curve,
    zero_one_error,
)
from hcvpipe.numeric import RngStream


def make_table(values, labels):
    values = np.asarray(values, dtype=np.float64)
    n, p = values.shape
    return FeatureTable(
        tuple(f"x{j}" for j in range(p)),
        values,
        np.zeros((n, p), dtype=bool),
        np.asarray(labels, dtype=np.int64),
        np.arange(n, dtype=np.int64),
    )


def blob_table(n_per=30, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_per, 2)) * 0.5 + [gap / 2, 0.0]
    b = rng.standard_normal((n_per, 2)) * 0.5 + [-gap / 2, 0.0]
    X = np.vstack([a, b])
    y = np.concatenate([np.zeros(n_per, dtype=int), np.ones(n_per, dtype=int)])
    return make_table(X, y)


def pair_count_auc(scores, actual):
    """Probability a random class-0 row outscores a random class-1 row,
    ties counted half."""
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[np.asarray(actual) == 0]
    neg = scores[np.asarray(actual) == 1]
    wins = 0.0
    for s in pos:
        wins += np.sum(s > neg) + 0.5 * np.sum(s == neg)
    return wins / (pos.size * neg.size)


class TestConfusion:
    def test_cell_conventions(self):
        cm = confusion([0, 0, 1, 1, 0], [0, 1, 1, 0, 0])
        assert (cm.tp, cm.fn, cm.fp, cm.tn) == (2, 1, 1, 1)
        assert cm.total == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            confusion([0, 1], [0])
        with pytest.raises(ValueError):
            confusion([], [])


class TestMetrics:
    def test_hand_computed_cells(self):
        m = metrics(ConfusionMatrix(tp=6, fn=2, fp=1, tn=3))
        assert m.accuracy == pytest.approx(9 / 12)
        assert m.precision == pytest.approx(6 / 8)
        assert m.sensitivity == pytest.approx(6 / 7)
        assert m.specificity == pytest.approx(3 / 5)
        p, r = 6 / 8, 6 / 7
        assert m.f1 == pytest.approx(2 * p * r / (p + r))

    def test_zero_denominators_become_none(self):
        m = metrics(ConfusionMatrix(tp=0, fn=0, fp=3, tn=2))
        assert m.precision is None
        assert m.f1 is None
        assert m.sensitivity == 0.0
        m = metrics(ConfusionMatrix(tp=4, fn=0, fp=0, tn=0))
        assert m.specificity is None

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            metrics(ConfusionMatrix(0, 0, 0, 0))

    def test_three_reference_matrices(self):
        """Hand-checked cells with their four-decimal metric values;
        the F_1 column is recomputed from precision and recall."""
        cases = {
            "svm": (ConfusionMatrix(tp=495, fn=10, fp=0, tn=59),
                    1.0000, 0.8551, 0.9823, 990 / 1000),
            "ann": (ConfusionMatrix(tp=493, fn=13, fp=2, tn=56),
                    0.9960, 0.8116, 0.9734, 986 / 1001),
            "rf": (ConfusionMatrix(tp=488, fn=12, fp=7, tn=57),
                   0.9859, 0.8261, 0.9663, 976 / 995),
        }
        for name, (cm, sens, spec, acc, f1) in cases.items():
            assert cm.total == 564, name
            m = metrics(cm)
            assert m.sensitivity == pytest.approx(sens, abs=5e-5), name
            assert m.specificity == pytest.approx(spec, abs=5e-5), name
            assert m.accuracy == pytest.approx(acc, abs=5e-5), name
            assert m.f1 == pytest.approx(f1, abs=1e-12), name


class TestRoc:
    def test_perfect_and_reversed_rankings(self):
        actual = [0, 0, 1, 1]
        assert roc_curve([4.0, 3.0, 2.0, 1.0], actual).auc == 1.0
        assert roc_curve([1.0, 2.0, 3.0, 4.0], actual).auc == 0.0

    def test_hand_computed_curve(self):
        curve = roc_curve([3.0, 2.0, 1.0], [0, 1, 0])
        np.testing.assert_array_equal(curve.thresholds, [np.inf, 3.0, 2.0, 1.0])
        np.testing.assert_allclose(
            curve.points, [(0, 0), (0, 0.5), (1, 0.5), (1, 1)]
        )
        assert curve.auc == pytest.approx(0.5)

    def test_curve_shape_invariants(self):
        rng = np.random.default_rng(0)
        scores = rng.random(40)
        actual = rng.integers(0, 2, 40)
        if len(np.unique(actual)) < 2:
            actual[0] = 1 - actual[0]
        curve = roc_curve(scores, actual)
        assert curve.thresholds[0] == np.inf
        assert np.all(np.diff(curve.thresholds) < 0)
        np.testing.assert_array_equal(curve.points[0], (0.0, 0.0))
        np.testing.assert_array_equal(curve.points[-1], (1.0, 1.0))
        assert np.all(np.diff(curve.points[:, 0]) >= 0)
        assert np.all(np.diff(curve.points[:, 1]) >= 0)

    def test_trapezoid_equals_pair_counting(self):
        rng = np.random.default_rng(1)
        for trial in range(50):
            n = int(rng.integers(4, 40))
            # snapping to a coarse grid forces tied scores
            scores = np.round(rng.random(n), 1)
            actual = rng.integers(0, 2, n)
            if len(np.unique(actual)) < 2:
                actual[0] = 1 - actual[0]
            curve = roc_curve(scores, actual)
            assert curve.auc == pytest.approx(
                pair_count_auc(scores, actual), abs=1e-12
            ), trial

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="both classes"):
            roc_curve([1.0, 2.0], [0, 0])


class TestGiniAndLoss:
    def test_gini_is_twice_auc_minus_one(self):
        for auc in np.arange(0.0, 1.0 + 1e-9, 0.01):
            assert gini_coefficient(float(auc)) == pytest.approx(2 * auc - 1, abs=1e-12)

    def test_gini_range_checked(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(ValueError):
                gini_coefficient(bad)

    def test_zero_one_error(self):
        pred = np.zeros(564, dtype=int)
        actual = np.zeros(564, dtype=int)
        actual[:10] = 1
        assert zero_one_error(pred, actual) == pytest.approx(10 / 564, abs=1e-12)
        assert zero_one_error([1, 1], [1, 1]) == 0.0
        with pytest.raises(ValueError):
            zero_one_error([], [])


class TestKfoldSplit:
    def test_partition_and_balance(self):
        folds = kfold_split(615, 10, seed=0)
        sizes = sorted(len(f) for f in folds)
        assert sizes == [61] * 5 + [62] * 5
        union = np.concatenate(folds)
        assert len(union) == 615
        assert len(np.unique(union)) == 615

    def test_stratified_fold_class_counts(self):
        labels = np.concatenate([np.zeros(540, dtype=int), np.ones(75, dtype=int)])
        folds = kfold_split(615, 10, stratify_labels=labels, seed=1)
        positives = sorted(int(labels[f].sum()) for f in folds)
        assert positives == [7] * 5 + [8] * 5
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1

    def test_determinism(self):
        a = kfold_split(100, 7, seed=5)
        b = kfold_split(100, 7, seed=5)
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa, fb)
        c = kfold_split(100, 7, seed=6)
        assert any(not np.array_equal(fa, fc) for fa, fc in zip(a, c))

    def test_validation(self):
        with pytest.raises(ValueError):
            kfold_split(10, 1)
        with pytest.raises(ValueError):
            kfold_split(3, 4)
        with pytest.raises(ValueError):
            kfold_split(10, 2, stratify_labels=np.zeros(9))


class TestFixedSplit:
    def test_stratified_quota_for_shipped_shape(self):
        labels = np.concatenate([np.zeros(540, dtype=int), np.ones(75, dtype=int)])
        train, test = fixed_split(615, 564, stratify_labels=labels, seed=0)
        assert len(train) == 564 and len(test) == 51
        assert len(np.intersect1d(train, test)) == 0
        # largest-remainder allocation: 495 donors + 69 patients train
        assert int((labels[train] == 0).sum()) == 495
        assert int((labels[train] == 1).sum()) == 69
        assert int((labels[test] == 1).sum()) == 6
        assert np.all(np.diff(train) > 0)

    def test_unstratified_split(self):
        train, test = fixed_split(20, 15, seed=3)
        assert len(train) == 15 and len(test) == 5
        np.testing.assert_array_equal(np.sort(np.concatenate([train, test])),
                                      np.arange(20))

    def test_validation(self):
        with pytest.raises(ValueError):
            fixed_split(10, 0)
        with pytest.raises(ValueError):
            fixed_split(10, 10)


class TestCrossValidate:
    def test_separable_data_pools_perfectly(self):
        table = blob_table()
        result = cross_validate(table, ModelSpec("svm"), v=2, seed=0)
        assert result.pooled_metrics.accuracy == 1.0
        np.testing.assert_array_equal(result.predictions, table.labels)
        assert result.pooled.total == table.n_rows
        assert len(result.folds) == 2
        assert len(result.fold_metrics) == 2

    def test_baseline_predicts_training_majority(self):
        rng = np.random.default_rng(4)
        labels = np.zeros(100, dtype=int)
        labels[:12] = 1
        table = make_table(rng.standard_normal((100, 3)), labels)
        result = cross_validate(table, ModelSpec("baseline"), v=5, seed=2)
        np.testing.assert_array_equal(result.predictions, np.zeros(100))
        assert result.pooled_metrics.accuracy == pytest.approx(0.88)
        np.testing.assert_array_equal(result.scores, np.full(100, 0.5))

    def test_mean_sd_summarize_folds(self):
        table = blob_table(seed=5)
        result = cross_validate(table, ModelSpec("rf", {"trees": 20}), v=3, seed=1)
        accs = [m.accuracy for m in result.fold_metrics]
        assert result.mean["accuracy"] == pytest.approx(np.mean(accs))
        assert result.sd["accuracy"] == pytest.approx(np.std(accs))

    def test_determinism(self):
        table = blob_table(seed=6)
        a = cross_validate(table, ModelSpec("ann", {"epochs": 100}), v=3, seed=9)
        b = cross_validate(table, ModelSpec("ann", {"epochs": 100}), v=3, seed=9)
        np.testing.assert_array_equal(a.predictions, b.predictions)
        np.testing.assert_array_equal(a.scores, b.scores)

    def test_incomplete_table_rejected(self):
        table = blob_table()
        table.missing[0, 0] = True
        with pytest.raises(ValueError, match="impute"):
            cross_validate(table, ModelSpec("svm"))

    def test_unknown_model_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown model kind"):
            ModelSpec("boost")


class TestEvaluateFixed:
    def test_train_test_shapes_and_fit(self):
        table = blob_table(n_per=40, seed=7)
        result = evaluate_fixed(table, ModelSpec("svm"), train_size=60, seed=0)
        assert len(result.train_idx) == 60
        assert len(result.test_idx) == 20
        assert result.confusion.total == 20
        assert result.metrics.accuracy == 1.0
        assert len(result.predictions) == 20

    def test_determinism_and_seed_sensitivity(self):
        table = blob_table(n_per=25, seed=8)
        a = evaluate_fixed(table, ModelSpec("rf", {"trees": 15}), 30, seed=RngStream(3))
        b = evaluate_fixed(table, ModelSpec("rf", {"trees": 15}), 30, seed=3)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        np.testing.assert_array_equal(a.predictions, b.predictions)
        c = evaluate_fixed(table, ModelSpec("rf", {"trees": 15}), 30, seed=4)
        assert not np.array_equal(a.train_idx, c.train_idx)
