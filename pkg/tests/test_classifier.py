import math

import numpy as np
import pytest

from sigverify.classifier import SvmModel, SvmParams, kernel_eval, svm_decision, svm_train
from sigverify.errors import DimensionMismatch, NoConvergence, SingleClass

from .oracles import kkt_violations


def full_alpha(model):
    return model.diagnostics["alpha"]


def kernel_fn(params):
    return lambda u, v: kernel_eval(params, u, v)


class TestKernel:
    def test_rbf_self(self):
        u = np.array([0.3, -1.2, 4.0])
        assert kernel_eval(SvmParams(kernel="rbf", gamma=0.7), u, u) == 1.0

    def test_linear_orthogonal(self):
        assert kernel_eval(SvmParams(kernel="linear"), [1, 0], [0, 1]) == 0.0

    def test_rbf_value(self):
        v = kernel_eval(SvmParams(kernel="rbf", gamma=0.5), [1.0, 1.0], [0.0, 0.0])
        assert v == pytest.approx(math.exp(-1.0), abs=1e-15)
        assert v == pytest.approx(0.3679, abs=1e-4)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kernel_eval(SvmParams(), [1.0], [1.0, 2.0])


class TestParams:
    @pytest.mark.parametrize(
        "kw", [{"C": 0}, {"C": -1}, {"gamma": 0.0}, {"tol": 0}, {"kernel": "poly"}, {"max_passes": 0}]
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SvmParams(**kw)


class TestTrain:
    def test_two_point_analytic(self):
        X = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        y = np.array([1.0, -1.0])
        m = svm_train(X, y, SvmParams(kernel="linear", C=10.0))
        # w = (1, 0, 0), b = 0, alpha = 1/2 each
        assert abs(svm_decision(m, [0.0, 0.0, 0.0])) < 1e-6
        assert svm_decision(m, [1.0, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-3)
        assert svm_decision(m, [0.0, 5.0, -3.0]) == pytest.approx(0.0, abs=1e-6)
        np.testing.assert_allclose(m.alphas, [0.5, 0.5], atol=1e-6)

    def test_single_class(self):
        with pytest.raises(SingleClass):
            svm_train(np.eye(3), np.ones(3))

    def test_xor_rbf(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0])
        m = svm_train(X, y, SvmParams(kernel="rbf", gamma=1.0, C=10.0))
        pred = np.sign([svm_decision(m, x) for x in X])
        np.testing.assert_array_equal(pred, y)

    @pytest.mark.parametrize("kernel", ["linear", "rbf"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_kkt_and_dual_feasibility(self, kernel, seed):
        rng = np.random.default_rng(seed)
        X = np.vstack([rng.normal(0.7, 1.0, (15, 3)), rng.normal(-0.7, 1.0, (15, 3))])
        y = np.r_[np.ones(15), -np.ones(15)]
        params = SvmParams(kernel=kernel, C=1.0, gamma=0.3, tol=1e-3)
        m = svm_train(X, y, params)
        a = full_alpha(m)
        assert np.all(a >= 0) and np.all(a <= params.C)
        assert abs(np.dot(a, y)) < 1e-6
        assert kkt_violations(X, y, a, m.bias, params.C, kernel_fn(m.params)) <= params.tol + 1e-12

    def test_free_support_vectors_on_margin(self):
        rng = np.random.default_rng(3)
        X = np.vstack([rng.normal(1.0, 0.8, (10, 2)), rng.normal(-1.0, 0.8, (10, 2))])
        y = np.r_[np.ones(10), -np.ones(10)]
        params = SvmParams(kernel="linear", C=5.0)
        m = svm_train(X, y, params)
        free = (m.alphas > 1e-8) & (m.alphas < params.C - 1e-8)
        assert free.any()
        for sv, lab in zip(m.support_vectors[free], m.labels[free]):
            assert svm_decision(m, sv) == pytest.approx(lab, abs=10 * params.tol)

    def test_mirror_symmetric_data(self):
        rng = np.random.default_rng(4)
        P = rng.normal(1.5, 0.5, (8, 2))
        X = np.vstack([P, -P])
        y = np.r_[np.ones(8), -np.ones(8)]
        m = svm_train(X, y, SvmParams(kernel="linear", C=1.0, tol=1e-4))
        assert abs(svm_decision(m, [0.0, 0.0])) < 1e-3

    def test_training_scores_match_diagnostics(self):
        rng = np.random.default_rng(5)
        X = np.vstack([rng.normal(0.3, 1.0, (12, 4)), rng.normal(-0.3, 1.0, (12, 4))])
        y = np.r_[np.ones(12), -np.ones(12)]
        m = svm_train(X, y, SvmParams(C=1.0))
        acc = np.mean(np.where(svm_decision(m, X) >= 0, 1.0, -1.0) == y)
        assert acc == m.diagnostics["train_accuracy"]

    @pytest.mark.parametrize("seed", range(5))
    def test_separable_perfect_accuracy(self, seed):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(3)
        X = rng.uniform(-1, 1, (50, 3))
        margin = X @ w
        X = X[np.abs(margin) > 0.1]
        y = np.where(X @ w > 0, 1.0, -1.0)
        m = svm_train(X, y, SvmParams(kernel="linear", C=100.0))
        np.testing.assert_array_equal(np.where(svm_decision(m, X) >= 0, 1.0, -1.0), y)

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((20, 5))
        y = np.where(rng.standard_normal(20) > 0, 1.0, -1.0)
        p = SvmParams(seed=17)
        a = svm_decision(svm_train(X, y, p), X)
        b = svm_decision(svm_train(X, y, p), X)
        assert np.array_equal(a, b)

    def test_default_gamma_is_inverse_dimension(self):
        X = np.random.default_rng(7).standard_normal((6, 10))
        m = svm_train(X, np.r_[np.ones(3), -np.ones(3)])
        assert m.params.gamma == pytest.approx(0.1)

    def test_no_convergence_carries_model(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((30, 3))
        y = np.where(rng.standard_normal(30) > 0, 1.0, -1.0)
        with pytest.raises(NoConvergence) as exc:
            svm_train(X, y, SvmParams(C=100.0, tol=1e-9, max_sweeps=1, max_passes=1))
        assert isinstance(exc.value.diagnostics["model"], SvmModel)
        assert exc.value.diagnostics["sweeps"] == 1

    def test_decision_dimension_mismatch(self):
        m = svm_train(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, -1.0]), SvmParams(kernel="linear"))
        with pytest.raises(DimensionMismatch):
            svm_decision(m, [1.0, 2.0, 3.0])

    def test_serialization_bitwise(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((16, 10))
        y = np.r_[np.ones(8), -np.ones(8)]
        m = svm_train(X, y)
        m2 = SvmModel.from_dict(m.to_dict())
        assert np.array_equal(svm_decision(m, X), svm_decision(m2, X))
