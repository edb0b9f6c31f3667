import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mramix.core import DegenerateLikelihoodError, NoiseModel, circular_shift
from mramix.datagen import GenSpec, ObservationSet, generate_observations, make_random_signal
from oracles import gaussian_pdf, posterior_oracle_components, posterior_oracle_shifts

from mramix.estep import (
    shift_log_likelihoods,
    update_noise_responsibilities,
    update_shift_weights,
)


def random_instance(m, n, seed, theta=None):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n)
    obs = ObservationSet(data=rng.standard_normal((m, n)), seed=seed)
    return obs, u, theta or NoiseModel(0.3, 4.0, 0.25)


class TestShiftLogLikelihoods:
    def test_single_component_reduction(self):
        # alpha=1: entry equals the plain Gaussian log-likelihood
        obs, u, _ = random_instance(3, 6, seed=0)
        theta = NoiseModel(1.0, 2.5, 7.0)
        got = shift_log_likelihoods(obs, u, theta)
        for i in range(obs.m):
            for l in range(obs.n):
                resid = obs.data[i] - circular_shift(u, l)
                expected = -obs.n / 2 * math.log(2 * math.pi * theta.sigma1_sq) - float(
                    resid @ resid
                ) / (2 * theta.sigma1_sq)
                assert got[i, l] == pytest.approx(expected, rel=1e-12)

    def test_direct_density_oracle(self):
        obs, u, theta = random_instance(2, 4, seed=1)
        got = shift_log_likelihoods(obs, u, theta)
        w_direct = posterior_oracle_shifts(obs.data, u, theta)
        # compare normalized posteriors (absolute levels checked via alpha=1 case)
        w_got = update_shift_weights(got).w
        assert np.max(np.abs(w_got - w_direct)) < 1e-10
        # and absolute values against a direct log-domain triple loop
        for i in range(2):
            for l in range(4):
                total = 0.0
                for j in range(4):
                    r = obs.data[i, j] - u[(j - l) % 4]
                    total += math.log(
                        theta.alpha * gaussian_pdf(r, theta.sigma1_sq)
                        + (1 - theta.alpha) * gaussian_pdf(r, theta.sigma2_sq)
                    )
                assert got[i, l] == pytest.approx(total, rel=1e-10)

    def test_constant_signal_rows_flat(self):
        obs = ObservationSet(data=np.full((2, 5), 1.3), seed=0)
        u = np.full(5, 0.4)
        got = shift_log_likelihoods(obs, u, NoiseModel(0.5, 1.0, 0.1))
        assert np.ptp(got, axis=1).max() < 1e-12

    def test_shape_mismatch(self):
        obs, u, theta = random_instance(2, 4, seed=3)
        with pytest.raises(ValueError):
            shift_log_likelihoods(obs, np.zeros(5), theta)


class TestUpdateShiftWeights:
    def test_uniform_row(self):
        w = update_shift_weights(np.zeros((1, 7))).w
        assert np.allclose(w, 1.0 / 7.0, atol=1e-15)

    def test_forced_row(self):
        w = update_shift_weights(np.array([[0.0, -np.inf, -np.inf, -np.inf]])).w
        assert np.array_equal(w, [[1.0, 0.0, 0.0, 0.0]])

    def test_matches_em_posterior_oracle(self):
        obs, u, theta = random_instance(3, 5, seed=7)
        w = update_shift_weights(shift_log_likelihoods(obs, u, theta)).w
        assert np.max(np.abs(w - posterior_oracle_shifts(obs.data, u, theta))) < 1e-12

    def test_acceptance_size_oracle(self):
        obs, u, theta = random_instance(5, 8, seed=11)
        w = update_shift_weights(shift_log_likelihoods(obs, u, theta)).w
        assert np.max(np.abs(w - posterior_oracle_shifts(obs.data, u, theta))) < 1e-12

    def test_degenerate_row_raises(self):
        with pytest.raises(DegenerateLikelihoodError):
            update_shift_weights(np.array([[-np.inf, -np.inf]]))


class TestNoiseResponsibilities:
    def test_equal_variances_give_prior(self):
        obs, u, _ = random_instance(2, 5, seed=2)
        q = update_noise_responsibilities(obs, u, NoiseModel(0.3, 1.7, 1.7)).q1
        assert np.allclose(q, 0.3, atol=1e-13)

    def test_degenerate_priors(self):
        obs, u, _ = random_instance(2, 5, seed=2)
        assert np.all(update_noise_responsibilities(obs, u, NoiseModel(1.0, 1.0, 2.0)).q1 == 1.0)
        assert np.all(update_noise_responsibilities(obs, u, NoiseModel(0.0, 1.0, 2.0)).q1 == 0.0)

    def test_matches_em_posterior_oracle(self):
        obs, u, theta = random_instance(2, 4, seed=5)
        q = update_noise_responsibilities(obs, u, theta).q1
        assert np.max(np.abs(q - posterior_oracle_components(obs.data, u, theta))) < 1e-12

    def test_acceptance_size_oracle(self):
        obs, u, theta = random_instance(5, 8, seed=13)
        q = update_noise_responsibilities(obs, u, theta).q1
        assert np.max(np.abs(q - posterior_oracle_components(obs.data, u, theta))) < 1e-12

    def test_monotone_in_residual_magnitude(self):
        # sigma1 > sigma2: bigger residuals must lean toward the wide component
        theta = NoiseModel(0.4, 25.0, 0.01)
        u = np.zeros(6)
        rs = np.linspace(0.0, 30.0, 40)
        obs = ObservationSet(data=np.tile(rs[:, None], (1, 6)), seed=0)
        q = update_noise_responsibilities(obs, u, theta).q1[:, 0, 0]
        assert np.all(np.diff(q) >= -1e-15)


class TestInvariants:
    @given(
        st.integers(0, 2**31),
        st.floats(0.0, 1.0),
        st.floats(1e-3, 1e3),
    )
    @settings(max_examples=40, deadline=None)
    def test_simplex_invariants(self, seed, alpha, ratio):
        rng = np.random.default_rng(seed)
        n, m = 5, 3
        u = rng.standard_normal(n)
        obs = ObservationSet(data=3.0 * rng.standard_normal((m, n)), seed=0)
        theta = NoiseModel(alpha, 1.0 * ratio, 1.0 / ratio)
        w = update_shift_weights(shift_log_likelihoods(obs, u, theta))
        w.validate(atol=1e-12)
        q = update_noise_responsibilities(obs, u, theta)
        q.validate()

    def test_shift_equivariance(self):
        # replacing u by R_s u permutes the shift axis by s
        obs, u, theta = random_instance(3, 8, seed=17)
        w0 = update_shift_weights(shift_log_likelihoods(obs, u, theta)).w
        q0 = update_noise_responsibilities(obs, u, theta).q1
        for s in range(8):
            us = circular_shift(u, s)
            ws = update_shift_weights(shift_log_likelihoods(obs, us, theta)).w
            qs = update_noise_responsibilities(obs, us, theta).q1
            perm = (np.arange(8) + s) % 8
            assert np.max(np.abs(ws - w0[:, perm])) < 1e-13
            assert np.max(np.abs(qs - q0[:, :, perm])) < 1e-13


def test_posteriors_on_generated_data_sane():
    u = make_random_signal(8, seed=3)
    noise = NoiseModel(0.2, 25.0, 1e-4)
    obs = generate_observations(u, GenSpec(m=40, noise=noise, seed=1))
    w = update_shift_weights(shift_log_likelihoods(obs, u, noise)).w
    # with the true signal and parameters the posterior should pick true shifts
    assert (w.argmax(axis=1) == obs.true_shifts).mean() > 0.9
