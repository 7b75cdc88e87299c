"""Optimal design closed forms and the independent numeric oracle."""

import numpy as np
import pytest

from splitrx import (ChannelVector, CheckFailedError, ConfigError, NoiseProfile,
                     ReceiverDesign, TransmitConfig, combined_noise_term,
                     egc_weights, mi_approx, mi_max, mrc_weights,
                     numeric_optimize, optimal_design, optimal_rho,
                     optimal_weights, rho_roots, stationarity_check)

NOISE = NoiseProfile(sigma_a_sq=0.01, sigma_cov_sq=1.0, sigma_rec_sq=0.01)
RHO_STAR = 0.5604631042240943


from oracles import golden_argmin


def random_splitting_noise(rng):
    """Noise profile guaranteed to be in the interior-splitting regime."""
    s_rec = rng.uniform(0.001, 0.2)
    s_cov = rng.uniform(4.2 * s_rec, 40.0 * s_rec)
    s_a = rng.uniform(0.001, 0.5 * s_cov)
    return NoiseProfile(sigma_a_sq=s_a, sigma_cov_sq=s_cov, sigma_rec_sq=s_rec)


class TestOptimalRho:

    def test_default_noise_value(self):
        rho, regime = optimal_rho(NOISE)
        assert regime == "splitting-optimal"
        assert abs(rho - 0.5605) <= 1e-3
        np.testing.assert_allclose(rho, RHO_STAR, rtol=1e-12)

    def test_degenerate_regime(self):
        quiet = NoiseProfile(sigma_a_sq=0.01, sigma_cov_sq=1.0, sigma_rec_sq=0.3)
        rho, regime = optimal_rho(quiet)
        assert rho == 1.0 and regime == "cd-degenerate"

    def test_matches_golden_section_on_random_profiles(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            noise = random_splitting_noise(rng)
            rho, regime = optimal_rho(noise)
            assert regime == "splitting-optimal"
            oracle = golden_argmin(lambda r: combined_noise_term(r, noise),
                                   1e-6, 1.0 - 1e-6, tol=1e-10)
            assert abs(rho - oracle) <= 1e-6

    def test_zero_antenna_noise_falls_back(self):
        noise = NoiseProfile(sigma_a_sq=0.0, sigma_cov_sq=1.0, sigma_rec_sq=0.01)
        rho, regime = optimal_rho(noise)
        assert regime == "splitting-optimal"
        oracle = golden_argmin(lambda r: combined_noise_term(r, noise),
                               1e-6, 1.0 - 1e-6, tol=1e-10)
        assert abs(rho - oracle) <= 1e-6

    def test_near_boundary_falls_back(self):
        noise = NoiseProfile(sigma_a_sq=0.01, sigma_cov_sq=1.0,
                             sigma_rec_sq=0.25 * (1.0 - 1e-14))
        rho, regime = optimal_rho(noise)
        assert regime == "splitting-optimal"
        assert 0.0 < rho < 1.0

    def test_invalid_noise(self):
        with pytest.raises(ConfigError) as err:
            optimal_rho(NoiseProfile(-0.1, 1.0, 0.01))
        assert err.value.code == "invalid-noise"

    def test_root_pair_location(self):
        """Only the first root lands inside (0, 1); the discarded one does not."""
        rng = np.random.default_rng(43)
        for _ in range(100):
            noise = random_splitting_noise(rng)
            inner, outer = rho_roots(noise)
            assert 0.0 < inner < 1.0
            assert not (0.0 < outer < 1.0)

    def test_curvature_at_optimum(self):
        """The combined noise term has positive curvature at its interior root."""
        rng = np.random.default_rng(47)
        for _ in range(30):
            noise = random_splitting_noise(rng)
            rho, _ = optimal_rho(noise)
            h = 1e-5
            second = (combined_noise_term(rho + h, noise)
                      - 2.0 * combined_noise_term(rho, noise)
                      + combined_noise_term(rho - h, noise)) / h ** 2
            assert second > 0


class TestWeights:

    def test_optimal_weights_proportional_to_power_gain(self):
        alpha, beta = optimal_weights(ChannelVector([1.0, 3.0]), 1.0, 1.0)
        np.testing.assert_allclose(alpha, [1.0, 9.0])
        np.testing.assert_allclose(beta, [1.0, 9.0])

    def test_equal_gains_coincide_with_egc(self):
        alpha, _ = optimal_weights(ChannelVector([2.0, 2.0, 2.0]), 1.0 / 12.0, 1.0)
        np.testing.assert_allclose(alpha, egc_weights(3))

    def test_constant_does_not_change_mi(self):
        channel = ChannelVector([1.0, 3.0])
        tx = TransmitConfig(500.0)
        values = []
        for c in (1.0, 0.37, 42.0):
            alpha, beta = optimal_weights(channel, c, c)
            design = ReceiverDesign.splitting([0.5, 0.5], alpha, beta)
            values.append(mi_approx(channel, NOISE, design, tx).value)
        assert max(values) - min(values) <= 1e-9

    def test_egc_and_mrc(self):
        np.testing.assert_allclose(egc_weights(3), [1 / 3] * 3)
        np.testing.assert_allclose(mrc_weights(ChannelVector([1.0, 3.0])), [1.0, 3.0])

    def test_schemes_satisfy_fixed_ratio(self):
        """EGC and MRC use the same alpha_k / beta_k ratio at every antenna."""
        channel = ChannelVector([0.5, 1.0, 2.0])
        for alpha, beta in ((egc_weights(3), egc_weights(3)),
                            (mrc_weights(channel), 2.5 * mrc_weights(channel))):
            ratio = alpha / beta
            np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)

    def test_optimal_design_bundle(self):
        opt = optimal_design(ChannelVector([1.0, 3.0]), NOISE)
        assert opt.regime == "splitting-optimal"
        np.testing.assert_allclose(opt.rho_star, RHO_STAR, rtol=1e-12)
        assert opt.upsilon is not None
        np.testing.assert_allclose(opt.alpha_star.sum(), 1.0, rtol=1e-12)
        np.testing.assert_allclose(opt.alpha_star, [0.1, 0.9], rtol=1e-12)
        quiet = NoiseProfile(0.01, 1.0, 0.3)
        assert optimal_design(ChannelVector([1.0]), quiet).upsilon is None


class TestNumericOptimize:

    def test_two_antenna_recovery(self):
        """Per-antenna search recovers the shared ratio and power-gain weights."""
        channel = ChannelVector([1.0, 3.0])
        tx = TransmitConfig(1000.0)
        result = numeric_optimize(channel, NOISE, tx, restarts=4, tolerance=1e-6)
        assert result.converged
        target = mi_max(channel, NOISE, tx, RHO_STAR).value
        assert abs(result.mi_bits - target) <= 1e-3
        np.testing.assert_allclose(result.design.rho, RHO_STAR, atol=1e-3)
        alpha = result.design.alpha / result.design.alpha.sum()
        np.testing.assert_allclose(alpha, [0.1, 0.9], rtol=1e-3)
        beta = result.design.beta / result.design.beta.sum()
        np.testing.assert_allclose(beta, [0.1, 0.9], rtol=1e-3)

    def test_shared_rho_variant(self):
        channel = ChannelVector([1.0, 2.0])
        tx = TransmitConfig(500.0)
        result = numeric_optimize(channel, NOISE, tx, restarts=3, shared_rho=True)
        assert abs(result.design.rho[0] - result.design.rho[1]) <= 1e-12
        assert abs(result.design.rho[0] - RHO_STAR) <= 1e-3

    def test_single_antenna_reduction(self):
        channel = ChannelVector([1.0])
        tx = TransmitConfig(100.0)
        result = numeric_optimize(channel, NOISE, tx, restarts=2)
        assert abs(result.design.rho[0] - RHO_STAR) <= 1e-3
        target = mi_max(channel, NOISE, tx, RHO_STAR).value
        assert abs(result.mi_bits - target) <= 1e-3


class TestStationarity:

    def _optimum(self, channel):
        opt = optimal_design(channel, NOISE)
        return ReceiverDesign.splitting(np.full(channel.n_antennas, opt.rho_star),
                                        opt.alpha_star, opt.beta_star)

    def test_gradient_small_at_optimum(self):
        channel = ChannelVector([1.0, 3.0])
        design = self._optimum(channel)
        report = stationarity_check(design, channel, NOISE, TransmitConfig(1000.0),
                                    step=1e-4, n_directions=20)
        assert report.grad_max_abs <= 1e-3
        assert report.n_decreasing == 20

    def test_hundred_perturbations_decrease(self):
        channel = ChannelVector([1.0, 3.0])
        design = self._optimum(channel)
        report = stationarity_check(design, channel, NOISE, TransmitConfig(1000.0),
                                    step=1e-2, n_directions=100)
        assert report.n_decreasing == 100

    def test_scaling_direction_is_null(self):
        channel = ChannelVector([1.0, 3.0])
        design = self._optimum(channel)
        report = stationarity_check(design, channel, NOISE, TransmitConfig(1000.0),
                                    step=1e-3, n_directions=10)
        assert report.scale_shift_bits <= 1e-9

    def test_failure_reports_direction(self):
        """A clearly non-optimal design must fail the check."""
        channel = ChannelVector([1.0, 3.0])
        bad = ReceiverDesign.splitting([0.2, 0.9], [0.5, 0.5], [0.5, 0.5])
        with pytest.raises(CheckFailedError) as err:
            stationarity_check(bad, channel, NOISE, TransmitConfig(1000.0),
                               step=1e-2, n_directions=50)
        assert err.value.report.grad_max_abs > 1e-3
