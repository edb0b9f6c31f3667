import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mramix.core import (
    DegenerateLikelihoodError,
    NoiseModel,
    canonical_shift,
    circular_shift,
    entropy_dual_value,
    log_sum_exp,
    soft_max_eps,
    validate_simplex,
)

finite_signals = arrays(
    np.float64,
    st.integers(min_value=2, max_value=16),
    elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
)


class TestCircularShift:
    def test_identity(self):
        assert np.array_equal(circular_shift([1, 2, 3, 4], 0), [1, 2, 3, 4])

    def test_shift_by_one(self):
        assert np.array_equal(circular_shift([1, 2, 3, 4], 1), [4, 1, 2, 3])

    def test_negative_shift(self):
        assert np.array_equal(circular_shift([1, 2, 3, 4], -1), [2, 3, 4, 1])

    def test_matches_index_remap_oracle(self):
        # independent oracle: explicit index arithmetic output[j] = x[(j-l) mod n]
        x = np.array([0.5, -1.0, 2.0, 3.5])
        n = 4
        for l in range(-4, 5):
            expected = np.array([x[(j - l) % n] for j in range(n)])
            assert np.array_equal(circular_shift(x, l), expected), f"l={l}"

    def test_inverse(self):
        x = np.arange(7.0)
        for l in range(-7, 8):
            assert np.array_equal(circular_shift(circular_shift(x, l), -l), x)

    def test_group_action_exhaustive(self):
        for n in (2, 3, 5, 8):
            x = np.arange(n) * 1.37
            for l1 in range(-2 * n, 2 * n + 1):
                for l2 in range(-2 * n, 2 * n + 1):
                    lhs = circular_shift(circular_shift(x, l1), l2)
                    rhs = circular_shift(x, l1 + l2)
                    assert np.array_equal(lhs, rhs)

    @given(finite_signals, st.integers(min_value=-50, max_value=50))
    def test_preserves_multiset_and_norm(self, x, l):
        y = circular_shift(x, l)
        assert sorted(y.tolist()) == sorted(x.tolist())
        # identical multisets -> identical norms (compare in a fixed order)
        assert np.linalg.norm(np.sort(y)) == np.linalg.norm(np.sort(x))

    def test_canonical_shift(self):
        assert canonical_shift(-1, 4) == 3
        assert canonical_shift(9, 4) == 1
        assert canonical_shift(0, 4) == 0


class TestLogSumExp:
    def test_single_entry(self):
        assert log_sum_exp([0.0]) == 0.0
        assert log_sum_exp([-1000.0]) == -1000.0

    def test_pair_underflow_safe(self):
        a = -1000.0
        assert log_sum_exp([a, a]) == pytest.approx(a + math.log(2.0), abs=1e-12)

    def test_direct_sum_oracle(self):
        v = np.array([-1.0, -2.0, -3.0])
        direct = math.log(sum(math.exp(t) for t in v))
        assert log_sum_exp(v) == pytest.approx(direct, abs=1e-14)

    @given(
        arrays(np.float64, st.integers(2, 12), elements=st.floats(-30, 30)),
        st.sampled_from([-1e4, 1e4]),
    )
    def test_shift_property(self, v, c):
        assert log_sum_exp(v + c) == pytest.approx(log_sum_exp(v) + c, rel=1e-12, abs=1e-9)

    def test_minus_inf_entries_ignored(self):
        assert log_sum_exp([-np.inf, 0.0]) == pytest.approx(0.0, abs=1e-15)

    def test_all_minus_inf_raises(self):
        with pytest.raises(DegenerateLikelihoodError):
            log_sum_exp([-np.inf, -np.inf])

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            log_sum_exp([])


class TestSoftMax:
    def test_symmetric(self):
        res = soft_max_eps([5.0, 5.0, 5.0], 1.0)
        assert res.value == pytest.approx(5.0 + math.log(3.0), abs=1e-12)
        assert np.allclose(res.weights, 1.0 / 3.0)

    def test_small_eps_approaches_max(self):
        res = soft_max_eps([1.0, 0.0], 1e-3)
        assert abs(res.value - 1.0) < 1e-2

    def test_duality_on_random_vectors(self):
        # both sides of the Fenchel identity evaluated independently
        rng = np.random.default_rng(42)
        for _ in range(100):
            x = rng.standard_normal(rng.integers(2, 10))
            eps = 0.7
            value, w = soft_max_eps(x, eps)
            validate_simplex(w)
            assert abs(value - entropy_dual_value(x, w, eps)) <= 1e-10

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = rng.standard_normal(6) * 10
            for eps in (0.1, 1.0, 3.7):
                value, _ = soft_max_eps(x, eps)
                assert value >= x.max() - 1e-12
                assert value <= x.max() + eps * math.log(x.size) + 1e-12

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            soft_max_eps([1.0, 2.0], 0.0)
        with pytest.raises(ValueError):
            soft_max_eps([1.0, 2.0], -1.0)


class TestDomainTypes:
    def test_noise_model_validation(self):
        NoiseModel(0.0, 1.0, 1.0)
        NoiseModel(1.0, 1e-12, 1e12)
        with pytest.raises(ValueError):
            NoiseModel(1.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            NoiseModel(-0.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            NoiseModel(0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            NoiseModel(0.5, 1.0, math.inf)

    def test_validate_simplex(self):
        validate_simplex([0.25, 0.75])
        with pytest.raises(ValueError):
            validate_simplex([0.5, 0.6])
        with pytest.raises(ValueError):
            validate_simplex([1.2, -0.2])
