import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmab_irl import soft_top_k, soft_top_k_jacobian
from rmab_irl.errors import DegenerateInputError, ParameterError
from rmab_irl.softtopk import soft_top_k_grad_dot

from .helpers import max_relative_error

SIGMA_HALF = 0.6224593312018546  # logistic(0.5)


class TestSoftTopK:
    def test_symmetric_ties_split_evenly(self):
        for eps in (1e-3, 0.1, 1.0):
            p = soft_top_k(np.array([1.0, 1.0]), 1, eps)
            assert np.allclose(p, [0.5, 0.5], atol=1e-9)

    def test_hard_limit(self):
        p = soft_top_k(np.array([2.0, 1.0]), 1, 1e-6)
        assert p[0] > 1 - 1e-6 and p[1] < 1e-6

    def test_symmetric_threshold_example(self):
        # w = [1, 0], K = 1, eps = 1: theta = 0.5 by symmetry
        p = soft_top_k(np.array([1.0, 0.0]), 1, 1.0)
        assert p[0] == pytest.approx(SIGMA_HALF, abs=1e-9)
        assert p[1] == pytest.approx(1 - SIGMA_HALF, abs=1e-9)

    def test_monotone_in_scores(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=8)
        p = soft_top_k(w, 3, 0.5)
        order = np.argsort(w)
        assert np.all(np.diff(p[order]) >= -1e-12)

    def test_budget_sum_random_inputs(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, n + 1))
            w = rng.normal(scale=rng.uniform(0.1, 10), size=n)
            p = soft_top_k(w, k, float(rng.uniform(0.01, 2.0)))
            assert abs(p.sum() - k) <= 1e-9

    def test_shift_invariance(self):
        w = np.array([0.3, -1.2, 0.8, 0.0])
        a = soft_top_k(w, 2, 0.7)
        b = soft_top_k(w + 5.0, 2, 0.7)
        assert np.allclose(a, b, atol=1e-9)

    def test_epsilon_zero_limit_recovers_hard_top_k(self):
        rng = np.random.default_rng(2)
        w = rng.permutation(np.linspace(0, 1, 7))
        p = soft_top_k(w, 3, 1e-8)
        top = np.argsort(-w)[:3]
        assert np.all(p[top] > 1 - 1e-6)
        assert np.all(np.delete(p, top) < 1e-6)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        w = rng.normal(size=6)
        perm = rng.permutation(6)
        assert np.allclose(soft_top_k(w[perm], 2, 0.4), soft_top_k(w, 2, 0.4)[perm], atol=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ParameterError):
            soft_top_k(np.array([1.0, np.inf]), 1, 0.1)
        with pytest.raises(ParameterError):
            soft_top_k(np.array([1.0, 2.0]), 0, 0.1)
        with pytest.raises(ParameterError):
            soft_top_k(np.array([1.0, 2.0]), 1, 0.0)

    @given(
        st.lists(st.floats(-50, 50), min_size=2, max_size=12),
        st.integers(1, 12),
        st.floats(0.01, 3.0),
    )
    @settings(max_examples=150, deadline=None)
    def test_budget_property(self, values, k, eps):
        w = np.array(values)
        k = min(k, w.size)
        p = soft_top_k(w, k, eps)
        assert abs(p.sum() - k) <= 1e-9
        assert np.all(p >= 0) and np.all(p <= 1)


class TestJacobian:
    def test_rows_sum_to_zero(self):
        j = soft_top_k_jacobian(np.array([0.5, -0.2, 1.1]), 2, 0.3)
        assert np.allclose(j.sum(axis=1), 0.0, atol=1e-12)

    def test_symmetric_inputs_give_symmetric_entries(self):
        j = soft_top_k_jacobian(np.array([1.0, 1.0]), 1, 1.0)
        assert j[0, 0] == pytest.approx(j[1, 1], abs=1e-12)
        assert j[0, 1] == pytest.approx(j[1, 0], abs=1e-12)

    def test_matches_finite_differences(self):
        w = np.array([1.0, 0.0])
        j = soft_top_k_jacobian(w, 1, 1.0)
        step = 1e-6
        fd = np.zeros((2, 2))
        for col in range(2):
            e = np.zeros(2)
            e[col] = step
            fd[:, col] = (soft_top_k(w + e, 1, 1.0) - soft_top_k(w - e, 1, 1.0)) / (2 * step)
        assert np.max(np.abs(j - fd)) <= 1e-6

    def test_matches_finite_differences_random(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(1, n))
            w = rng.normal(size=n)
            eps = float(rng.uniform(0.2, 1.5))
            j = soft_top_k_jacobian(w, k, eps)
            step = 1e-6
            fd = np.zeros((n, n))
            for col in range(n):
                e = np.zeros(n)
                e[col] = step
                fd[:, col] = (soft_top_k(w + e, k, eps) - soft_top_k(w - e, k, eps)) / (2 * step)
            assert np.max(np.abs(j - fd)) <= 1e-6

    def test_jacobian_symmetry(self):
        j = soft_top_k_jacobian(np.array([0.9, -0.4, 0.2, 1.4]), 2, 0.6)
        assert np.allclose(j, j.T, atol=1e-12)

    def test_degenerate_saturation_raises(self):
        with pytest.raises(DegenerateInputError):
            soft_top_k_jacobian(np.array([100.0, 0.0]), 1, 1e-9)

    def test_grad_dot_matches_matrix(self):
        rng = np.random.default_rng(5)
        w = rng.normal(size=5)
        up = rng.normal(size=5)
        j = soft_top_k_jacobian(w, 2, 0.5)
        assert np.allclose(soft_top_k_grad_dot(w, 2, 0.5, up), up @ j, atol=1e-12)
