import numpy as np
import pytest

from cryscreen import svm
from cryscreen.errors import DimensionMismatch, SingleClassInput, TooFewSamples
from cryscreen.svm import (
    KernelSpec,
    Standardizer,
    SvmModel,
    TrainConfig,
    TrainingMeta,
    decision_value,
    decision_values,
    dual_objective,
    kernel_eval,
    predict,
    smo_train,
    standardize_apply,
    standardize_fit,
)


def grid_qp_max(kernel: KernelSpec, x, y, c, coarse=0.1, fine=0.004):
    """Brute-force dual maximum for problems of up to 4 points: enumerate
    the free dual variables on a grid (the last one is fixed by the
    equality constraint), then refine around the coarse argmax."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = svm._kernel_matrix(kernel, x, x)
    q = np.outer(y, y) * k
    n = len(y)

    def objective(a):
        return a.sum(axis=1) - 0.5 * np.einsum("ni,ij,nj->n", a, q, a)

    def search(centers, radius, step):
        axes = [np.arange(max(0.0, ctr - radius), min(c, ctr + radius) + step / 2, step)
                for ctr in centers[:n - 1]]
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.stack([m.ravel() for m in mesh], axis=1)
        last = -(free @ y[:n - 1]) / y[n - 1]
        ok = (last >= 0) & (last <= c)
        a = np.column_stack([free[ok], last[ok]])
        vals = objective(a)
        best = np.argmax(vals)
        return a[best], vals[best]

    center0 = np.full(n, c / 2)
    a1, _ = search(center0, c, coarse)
    a2, v2 = search(a1, 2 * coarse, fine)
    return v2


class TestKernelEval:
    def test_rbf_same_point(self):
        spec = KernelSpec("rbf", gamma=0.7)
        assert kernel_eval(spec, np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 1.0

    def test_linear_dot(self):
        assert kernel_eval(KernelSpec("linear"), np.array([1.0, 2.0]),
                           np.array([3.0, 4.0])) == 11.0

    def test_rbf_known_value(self):
        spec = KernelSpec("rbf", gamma=0.5)
        out = kernel_eval(spec, np.array([0.0, 0.0]), np.array([2.0, 0.0]))
        assert out == pytest.approx(np.exp(-2.0), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kernel_eval(KernelSpec("linear"), np.zeros(2), np.zeros(3))

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            KernelSpec("poly")
        with pytest.raises(ValueError):
            KernelSpec("rbf", gamma=0.0)


class TestStandardizer:
    def test_fit_apply_moments(self, rng):
        x = rng.normal(3.0, 2.5, size=(50, 4))
        s = standardize_fit(x)
        z = standardize_apply(s, x)
        assert np.max(np.abs(z.mean(axis=0))) < 1e-9
        assert z.var(axis=0) == pytest.approx(np.ones(4), abs=1e-9)

    def test_constant_column(self, rng):
        x = rng.normal(size=(20, 3))
        x[:, 1] = 5.0
        s = standardize_fit(x)
        assert s.stds[1] == 1.0
        assert s.constant_mask.tolist() == [False, True, False]
        assert np.allclose(standardize_apply(s, x)[:, 1], 0.0)

    def test_affine(self, rng):
        x = rng.normal(size=(10, 5))
        s = standardize_fit(x)
        a, b = rng.normal(size=5), rng.normal(size=5)
        lhs = standardize_apply(s, (a + b) / 2)
        rhs = (standardize_apply(s, a) + standardize_apply(s, b)) / 2
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_too_few_rows(self):
        with pytest.raises(TooFewSamples):
            standardize_fit(np.zeros((1, 3)))


class TestSmoAnalytic:
    def test_two_point_solution(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        model = smo_train(x, y, KernelSpec("linear"), TrainConfig(C=1.0, seed=0))
        alphas = np.abs(model.dual_coefs)
        assert alphas == pytest.approx([0.5, 0.5], abs=1e-6)
        assert abs(model.bias) < 1e-6
        for probe in np.linspace(-2, 2, 21):
            assert decision_value(model, np.array([probe])) == \
                pytest.approx(probe, abs=1e-6)

    def test_two_point_against_grid_qp(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        kernel = KernelSpec("linear")
        model = smo_train(x, y, kernel, TrainConfig(C=1.0, seed=0))
        assert dual_objective(model) >= grid_qp_max(kernel, x, y, 1.0) - 1e-3

    def test_xor_rbf(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([-1.0, -1.0, 1.0, 1.0])
        kernel = KernelSpec("rbf", gamma=1.0)
        model = smo_train(x, y, kernel, TrainConfig(C=10.0, seed=0))
        assert [predict(model, xi) for xi in x] == [-1, -1, 1, 1]
        brute = grid_qp_max(kernel, x, y, 10.0)
        assert dual_objective(model) == pytest.approx(brute, abs=1e-3)


class TestSmoProperties:
    @staticmethod
    def blobs(seed, n=15):
        r = np.random.default_rng(seed)
        xa = r.normal(loc=[1.2, 1.0], scale=0.8, size=(n, 2))
        xb = r.normal(loc=[-1.2, -1.0], scale=0.8, size=(n, 2))
        return np.vstack([xa, xb]), np.array([1.0] * n + [-1.0] * n)

    def test_dual_feasibility(self):
        x, y = self.blobs(5)
        cfg = TrainConfig(C=1.0, seed=5)
        model = smo_train(x, y, KernelSpec("rbf", gamma=0.5), cfg)
        assert np.all(np.abs(model.dual_coefs) <= cfg.C + 1e-12)
        assert abs(model.dual_coefs.sum()) <= 1e-6
        assert model.n_support_vectors >= 1

    def test_kkt_conditions(self):
        tau = 1e-3
        x, y = self.blobs(9)
        c = 1.0
        model = smo_train(x, y, KernelSpec("rbf", gamma=0.5),
                          TrainConfig(C=c, tolerance=tau, seed=9))
        assert model.training_meta.converged
        margins = y * decision_values(model, x)
        alphas = _alphas_for_rows(model, x)
        for a, margin in zip(alphas, margins):
            if a <= 1e-8:
                assert margin >= 1 - tau
            elif a >= c - 1e-8:
                assert margin <= 1 + tau
            else:
                assert abs(margin - 1) <= tau

    def test_determinism_bit_identical(self):
        x, y = self.blobs(3)
        cfg = TrainConfig(C=1.0, seed=3)
        a = smo_train(x, y, KernelSpec("rbf", gamma=0.5), cfg)
        b = smo_train(x, y, KernelSpec("rbf", gamma=0.5), cfg)
        assert np.array_equal(a.support_vectors, b.support_vectors)
        assert np.array_equal(a.dual_coefs, b.dual_coefs)
        assert a.bias == b.bias
        assert a.training_meta == b.training_meta

    def test_label_flip_symmetry(self, rng):
        x, y = self.blobs(12)
        kernel = KernelSpec("rbf", gamma=0.5)
        pos = smo_train(x, y, kernel, TrainConfig(C=1.0, seed=12))
        neg = smo_train(x, -y, kernel, TrainConfig(C=1.0, seed=12))
        for probe in rng.normal(size=(50, 2)):
            assert decision_value(neg, probe) == \
                pytest.approx(-decision_value(pos, probe), abs=1e-9)

    def test_duplicated_dataset_same_signs(self, rng):
        # separable data, no alpha at bound: duplication must not move the
        # boundary (each copy takes half the original dual weight)
        r = np.random.default_rng(21)
        xa = r.normal(loc=[2.0, 1.8], scale=0.5, size=(15, 2))
        xb = r.normal(loc=[-2.0, -1.8], scale=0.5, size=(15, 2))
        x, y = np.vstack([xa, xb]), np.array([1.0] * 15 + [-1.0] * 15)
        kernel = KernelSpec("rbf", gamma=0.5)
        base = smo_train(x, y, kernel, TrainConfig(C=10.0, seed=21))
        assert np.abs(base.dual_coefs).max() < 10.0
        doubled = smo_train(np.vstack([x, x]), np.hstack([y, y]), kernel,
                            TrainConfig(C=10.0, seed=21))
        probes = rng.normal(scale=2.0, size=(100, 2))
        signs_a = np.sign(decision_values(base, probes))
        signs_b = np.sign(decision_values(doubled, probes))
        assert np.array_equal(signs_a, signs_b)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassInput):
            smo_train(np.zeros((3, 2)), np.ones(3), KernelSpec("linear"),
                      TrainConfig())

    def test_nonconvergence_is_tagged_not_raised(self):
        x, y = self.blobs(4, n=20)
        model = smo_train(x, y, KernelSpec("rbf", gamma=0.5),
                          TrainConfig(C=1.0, max_passes=1, seed=4))
        assert isinstance(model, SvmModel)
        assert model.training_meta.n_passes_run == 1


def _alphas_for_rows(model, x):
    """Dual variable per training row (0 for dropped non-SVs)."""
    alphas = np.zeros(len(x))
    for i, xi in enumerate(x):
        for j, sv in enumerate(model.support_vectors):
            if np.array_equal(xi, sv):
                alphas[i] = abs(model.dual_coefs[j])
                break
    return alphas


class TestDecisionAndPredict:
    @staticmethod
    def bias_only_model(bias, dim=2):
        return SvmModel(
            kernel=KernelSpec("linear"),
            standardizer=Standardizer.identity(dim),
            support_vectors=np.zeros((1, dim)),
            dual_coefs=np.zeros(1),
            bias=bias,
            training_meta=TrainingMeta(C=1.0, tolerance=1e-3, max_passes=1, seed=0),
        )

    def test_positive_bias_predicts_asphyxia(self):
        assert predict(self.bias_only_model(5.0), np.zeros(2)) == 1

    def test_negative_bias_predicts_normal(self):
        assert predict(self.bias_only_model(-5.0), np.zeros(2)) == -1

    def test_exact_zero_ties_to_positive(self):
        assert predict(self.bias_only_model(0.0), np.zeros(2)) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            decision_value(self.bias_only_model(0.0), np.zeros(3))

    def test_interior_sv_sits_on_margin(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        model = smo_train(x, y, KernelSpec("linear"), TrainConfig(C=1.0, seed=0))
        for xi, yi in zip(x, y):
            assert yi * decision_value(model, xi) == pytest.approx(1.0, abs=1e-3)
