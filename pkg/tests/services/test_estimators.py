"""
Tests for the empirical Bayes fit, the MAP wavelet denoisers and the
coefficient-domain risk.
"""

import numpy as np
import pytest

from src.services.errors import InvalidInputError, InvalidParameterError
from src.services.estimators import (
    ESTIMATORS,
    conditional_gamma_hat,
    conditional_q_hat,
    denoise_global,
    denoise_levelwise,
    denoise_universal,
    estimate_sigma_mad,
    fit_level,
    get_estimator,
    profile_loglik,
    weighted_level_risk,
)
from src.services.testbed import add_noise, make_signal, mse
from src.services.wavelet import dwt_forward, dwt_inverse, zero_decomposition


class TestSigmaMad:

    def test_zeros(self):
        assert estimate_sigma_mad(np.zeros(16)) == 0.0

    def test_scaled_constant(self):
        d = np.array([0.6745, -0.6745] * 8)
        assert estimate_sigma_mad(d) == pytest.approx(1.0)

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            estimate_sigma_mad([])

    def test_gaussian_calibration(self):
        rng = np.random.default_rng(3)
        values = [estimate_sigma_mad(rng.standard_normal(512)) for _ in range(100)]
        assert 0.9 <= np.median(values) <= 1.1

    def test_doppler_calibration(self):
        clean = make_signal("doppler", 1024)
        ratios = []
        for r in range(100):
            obs = add_noise(clean, 7.0, seed=5, stream_key=(r,))
            finest = dwt_forward(obs.y, "coif3", 4).details[-1]
            ratios.append(estimate_sigma_mad(finest) / obs.sigma)
        assert 0.9 <= np.median(ratios) <= 1.1


class TestHyperparameters:

    def test_gamma_hat_closed_form(self):
        assert conditional_gamma_hat(4.0, 1, sigma=1.0) == pytest.approx(3.0, abs=1e-9)
        assert conditional_gamma_hat(4.0 * 2.5 ** 2, 1, sigma=2.5) == pytest.approx(3.0, abs=1e-9)

    def test_gamma_hat_floor_and_zero(self):
        assert conditional_gamma_hat(0.5, 1, sigma=1.0) == 0.0
        assert conditional_gamma_hat(0.0, 0, sigma=1.0) == 0.0

    def test_q_hat(self):
        assert conditional_q_hat(3) == pytest.approx(0.75, abs=1e-12)
        np.testing.assert_allclose(conditional_q_hat(np.array([0, 1, 9])), [0.0, 0.5, 0.9])

    def test_profile_recovers_constructed_gamma(self):
        sigma, g, kappa = 1.5, 2.0, 4
        y = np.concatenate([np.full(kappa, sigma * np.sqrt(1 + g)), np.full(12, 0.01)])
        _, gamma_hat, q_hat = profile_loglik(y, sigma)
        assert gamma_hat[kappa] == pytest.approx(g, abs=1e-9)
        assert q_hat[kappa] == pytest.approx(kappa / (kappa + 1))

    def test_zero_level(self):
        fit = fit_level(np.zeros(32), sigma=1.0, j=5)
        assert fit.kappa_hat == 0
        assert fit.gamma_hat == 0.0
        assert fit.j == 5

    def test_fit_is_profile_argmax(self, rng):
        y = rng.standard_normal(64)
        y[:5] += 7
        profile, _, _ = profile_loglik(y, 1.0)
        fit = fit_level(y, 1.0)
        assert fit.profile_loglik == pytest.approx(profile.max())
        assert fit.profile_loglik >= profile[0]
        assert fit.profile_loglik >= profile[-1]
        assert fit.kappa_hat >= 1
        assert 0 < fit.q_hat < 1

    def test_rejects_bad_sigma(self):
        with pytest.raises(InvalidParameterError):
            fit_level(np.ones(4), sigma=0.0)


class TestDenoisers:

    @pytest.fixture
    def noisy_wave(self):
        return add_noise(make_signal("wave", 1024), 5.0, seed=1)

    def test_registry(self):
        assert set(ESTIMATORS) == {"map-levelwise", "map-global", "universal-hard"}
        assert get_estimator("map-global") is denoise_global
        with pytest.raises(InvalidParameterError):
            get_estimator("posterior-median")

    @pytest.mark.parametrize("denoise", [denoise_levelwise, denoise_global, denoise_universal])
    def test_result_invariants(self, denoise, noisy_wave):
        result = denoise(noisy_wave.y, "coif3", 4)
        truth = dwt_forward(noisy_wave.y, "coif3", 4)
        np.testing.assert_array_equal(result.decomposition_hat.scaling, truth.scaling)
        np.testing.assert_allclose(result.f_hat, dwt_inverse(result.decomposition_hat, "coif3"))
        total = 1024 - 16
        assert result.surviving_fraction == result.decomposition_hat.count_nonzero_details() / total
        assert 0.0 <= result.surviving_fraction <= 1.0
        assert mse(result.f_hat, noisy_wave.clean.samples) < mse(noisy_wave.y, noisy_wave.clean.samples)

    def test_levelwise_keeps_subset_of_coefficients(self, noisy_wave):
        result = denoise_levelwise(noisy_wave.y, "coif3", 4)
        observed = dwt_forward(noisy_wave.y, "coif3", 4)
        for kept, original in zip(result.decomposition_hat.details, observed.details):
            assert np.all((kept == 0) | (kept == original))
        assert [f.j for f in result.level_fits] == list(range(4, 10))

    def test_global_pools_all_details(self, noisy_wave):
        result = denoise_global(noisy_wave.y, "coif3", 4)
        assert len(result.level_fits) == 1
        assert result.level_fits[0].j is None
        assert result.level_fits[0].size == 2 ** 10 - 2 ** 4

    def test_zero_details_reproduce_scaling_part(self, rng):
        decomp = zero_decomposition(J=9, j0=4)
        decomp = type(decomp)(j0=4, J=9, scaling=rng.standard_normal(16), details=decomp.details)
        signal = dwt_inverse(decomp, "coif3")
        result = denoise_global(signal, "coif3", 4, sigma=1.0)
        np.testing.assert_allclose(result.f_hat, signal, atol=1e-10)
        assert result.surviving_fraction == 0.0

    def test_noiseless_signal_survives(self):
        clean = make_signal("wave", 1024).samples
        result = denoise_levelwise(clean, "coif3", 4, sigma=1e-6)
        assert np.sum((result.f_hat - clean) ** 2) / np.sum(clean ** 2) <= 1e-3

    @pytest.mark.parametrize("c", [0.1, 10.0])
    def test_scale_equivariance(self, c, noisy_wave):
        base = denoise_levelwise(noisy_wave.y, "coif3", 4, sigma=noisy_wave.sigma)
        scaled = denoise_levelwise(c * noisy_wave.y, "coif3", 4, sigma=c * noisy_wave.sigma)
        np.testing.assert_allclose(scaled.f_hat, c * base.f_hat, rtol=1e-8, atol=1e-12 * c)
        for a, b in zip(scaled.decomposition_hat.details, base.decomposition_hat.details):
            np.testing.assert_array_equal(a != 0, b != 0)

    def test_deterministic(self, noisy_wave):
        a = denoise_levelwise(noisy_wave.y, "coif3", 4)
        b = denoise_levelwise(noisy_wave.y, "coif3", 4)
        np.testing.assert_array_equal(a.f_hat, b.f_hat)
        assert a.level_fits == b.level_fits

    def test_constant_input_is_degenerate(self):
        y = np.ones(1024)
        result = denoise_levelwise(y, "coif3", 4)
        assert result.sigma_hat == 0.0
        assert result.level_fits == []
        np.testing.assert_allclose(result.f_hat, y, atol=1e-12)

    def test_universal_threshold(self, noisy_wave):
        result = denoise_universal(noisy_wave.y, "coif3", 4, sigma=noisy_wave.sigma)
        threshold = noisy_wave.sigma * np.sqrt(2 * np.log(1024))
        kept = result.decomposition_hat.pooled_details()
        assert np.all((kept == 0) | (np.abs(kept) > threshold))

    def test_rejects_bad_sigma(self, noisy_wave):
        with pytest.raises(InvalidParameterError):
            denoise_levelwise(noisy_wave.y, "coif3", 4, sigma=-1.0)

    @pytest.mark.slow
    def test_pure_noise_is_mostly_killed(self):
        rng = np.random.default_rng(17)
        fractions = [
            denoise_levelwise(rng.standard_normal(1024), "coif3", 4).surviving_fraction
            for _ in range(50)
        ]
        assert np.median(fractions) <= 0.10

    @pytest.mark.slow
    def test_levelwise_within_factor_of_global(self):
        clean = make_signal("wave", 4096)
        level, pooled = [], []
        for r in range(50):
            obs = add_noise(clean, 5.0, seed=2, stream_key=(r,))
            level.append(mse(denoise_levelwise(obs.y, "coif3", 4).f_hat, clean.samples))
            pooled.append(mse(denoise_global(obs.y, "coif3", 4).f_hat, clean.samples))
        assert np.median(level) <= 1.5 * np.median(pooled)


class TestWeightedRisk:

    def _pair(self, J=8, j0=4):
        return zero_decomposition(J, j0), zero_decomposition(J, j0)

    def _with_errors(self, decomp, errors):
        details = [d.copy() for d in decomp.details]
        for j, value in errors.items():
            details[j - decomp.j0][0] = value
        return decomp.with_details(details)

    def test_single_error(self):
        truth, _ = self._pair()
        hat = self._with_errors(truth, {5: 1.0})
        assert weighted_level_risk(hat, truth, 1.0) == pytest.approx(2.0 ** 10)

    def test_half_order(self):
        truth, _ = self._pair()
        hat = self._with_errors(truth, {4: 1.0, 6: 1.0})
        assert weighted_level_risk(hat, truth, 0.5) == pytest.approx(2.0 ** 4 + 2.0 ** 6)

    def test_scaling_weight(self):
        truth = zero_decomposition(8, 4)
        hat = type(truth)(j0=4, J=8, scaling=np.r_[1.0, np.zeros(15)], details=truth.details)
        assert weighted_level_risk(hat, truth, 1.0) == pytest.approx(2.0 ** 6)

    def test_order_zero_is_l2_error_and_monotone(self, rng):
        clean = make_signal("peak", 512)
        obs = add_noise(clean, 3.0, seed=4)
        result = denoise_levelwise(obs.y, "coif3", 4)
        truth = dwt_forward(clean.samples, "coif3", 4)
        plain = np.sum((result.f_hat - clean.samples) ** 2)
        assert weighted_level_risk(result.decomposition_hat, truth, 0.0) == pytest.approx(plain, rel=1e-9)
        risks = [weighted_level_risk(result.decomposition_hat, truth, m) for m in (0, 0.5, 1, 2)]
        assert all(a <= b for a, b in zip(risks, risks[1:]))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            weighted_level_risk(zero_decomposition(8, 4), zero_decomposition(8, 3), 0)

    def test_negative_order(self):
        truth = zero_decomposition(6, 2)
        with pytest.raises(InvalidParameterError):
            weighted_level_risk(truth, truth, -1)
