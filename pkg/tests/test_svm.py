import numpy as np
import pytest

from hcvpipe.svm import (
    SvmModel,
    decision_value,
    from_pm_labels,
    predict01,
    predict_sign,
    to_pm_labels,
    train_svm,
)


def blobs(n_per=20, gap=4.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_per, 2)) * 0.4 + [gap / 2, 0.0]
    b = rng.standard_normal((n_per, 2)) * 0.4 + [-gap / 2, 0.0]
    X = np.vstack([a, b])
    y = np.concatenate([np.ones(n_per), -np.ones(n_per)])
    return X, y


XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_PM = np.array([1.0, -1.0, -1.0, 1.0])


class TestLabelMaps:
    def test_roundtrip(self):
        labels = np.array([0, 1, 1, 0, 1])
        pm = to_pm_labels(labels)
        np.testing.assert_array_equal(pm, [1.0, -1.0, -1.0, 1.0, -1.0])
        np.testing.assert_array_equal(from_pm_labels(pm), labels)


class TestTwoPointOracle:
    """x=-1 labeled -1 against x=+1 labeled +1 has the closed-form
    maximal-margin solution w=1, b=0, alpha=(1/2, 1/2)."""

    def test_matches_closed_form(self):
        model = train_svm(np.array([[-1.0], [1.0]]), np.array([-1.0, 1.0]), C=1.0)
        assert model.w[0] == pytest.approx(1.0, abs=1e-6)
        assert model.bias == pytest.approx(0.0, abs=1e-6)
        assert set(model.support_idx) == {0, 1}
        np.testing.assert_allclose(model.alpha, [0.5, 0.5], atol=1e-6)

    def test_decision_values_follow_w(self):
        model = train_svm(np.array([[-1.0], [1.0]]), np.array([-1.0, 1.0]), C=1.0)
        assert decision_value(model, np.array([0.3])) == pytest.approx(0.3, abs=1e-6)
        vals = decision_value(model, np.array([[-2.0], [2.0]]))
        np.testing.assert_allclose(vals, [-2.0, 2.0], atol=1e-6)


class TestSeparableBlobs:
    def test_perfect_training_accuracy_and_margins(self):
        X, y = blobs()
        model = train_svm(X, y, C=1.0)
        margins = y * decision_value(model, X)
        assert np.all(margins > 0)
        # at convergence every point sits on or outside the margin and
        # the supports sit on it
        assert margins.min() >= 1.0 - 0.05
        sv_margins = y[model.support_idx] * decision_value(model, X[model.support_idx])
        assert sv_margins.min() <= 1.0 + 0.05
        assert len(model.support_idx) < len(y)

    def test_determinism(self):
        X, y = blobs(seed=3)
        a = train_svm(X, y, C=2.0)
        b = train_svm(X, y, C=2.0)
        np.testing.assert_array_equal(a.w, b.w)
        assert a.bias == b.bias
        np.testing.assert_array_equal(a.support_idx, b.support_idx)


class TestXor:
    def test_linear_kernel_cannot_fit(self):
        model = train_svm(XOR_X, XOR_PM, C=10.0)
        acc = float(np.mean(predict_sign(model, XOR_X) == XOR_PM))
        assert acc <= 0.75

    def test_rbf_kernel_fits(self):
        model = train_svm(XOR_X, XOR_PM, C=10.0, kernel="rbf", gamma=3.0)
        acc = float(np.mean(predict_sign(model, XOR_X) == XOR_PM))
        assert acc == 1.0
        assert model.w is None


class TestPrediction:
    def test_zero_decision_counts_as_donor(self):
        model = SvmModel(
            w=np.array([1.0]), bias=0.0, C=1.0, kernel="linear", gamma=None,
            support_idx=np.array([0]), alpha=np.array([1.0]),
            support_vectors=np.array([[1.0]]), support_labels=np.array([1.0]),
            iterations=0,
        )
        assert predict_sign(model, np.array([0.0])) == 1
        assert predict01(model, np.array([0.0])) == 0
        assert predict01(model, np.array([-0.001])) == 1

    def test_feature_count_checked(self):
        X, y = blobs()
        model = train_svm(X, y)
        with pytest.raises(ValueError, match="features"):
            decision_value(model, np.zeros(3))


class TestValidation:
    def test_rejects_bad_inputs(self):
        X = np.array([[0.0], [1.0]])
        with pytest.raises(ValueError, match="single-class"):
            train_svm(X, np.array([1.0, 1.0]))
        with pytest.raises(ValueError, match=r"\+1/-1"):
            train_svm(X, np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="C must"):
            train_svm(X, np.array([1.0, -1.0]), C=0.0)
        with pytest.raises(ValueError, match="kernel"):
            train_svm(X, np.array([1.0, -1.0]), kernel="poly")
        with pytest.raises(ValueError, match="finite"):
            train_svm(np.array([[np.nan], [1.0]]), np.array([1.0, -1.0]))

    def test_rbf_gamma_defaults_to_inverse_dim(self):
        X, y = blobs(n_per=10)
        model = train_svm(X, y, kernel="rbf")
        assert model.gamma == pytest.approx(0.5)
