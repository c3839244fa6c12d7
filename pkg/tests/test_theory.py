import math

import numpy as np
import pytest

from detchain.model import ChainParams
from detchain.theory import (
    TheoryError,
    c_alpha,
    effective_hopping,
    eq_lr_spectrum,
    gamma_critical,
    gap_scaling_exponent,
    gap_theory,
    localization_length,
    predict_thresholds,
    spectral_radius_limit,
    spectral_radius_sum,
    w1_alpha,
    w1_zero,
    w2_zero,
    w_gap_alpha,
    w_gap_zero,
    w_peak,
)

# reference values computed independently with 30-digit arithmetic
OMEGA_THIRD = 0.20629947401590026
W1_3200_THIRD = 0.15028206232430052
C_3200_THIRD = 203.69711360120363
WGAP_3200_THIRD = 3288.0405488649167
GAMMA_CR_3200 = 0.0003041325023638214
W1_100 = 3.112760522642072
W2_100 = 31.12760522642072
WGAP_100 = 230.25850929940458
RADIUS_ZETA_2 = 4.934802200544679
WPEAK_2_INF = 17.09465627329217
WPEAK_2_N8 = 15.39600717839002


class TestEffectiveHopping:
    def test_all_to_all_vanishes(self):
        assert effective_hopping(0.0) == 0.0

    def test_one_third(self):
        assert effective_hopping(1 / 3, 1.0) == pytest.approx(OMEGA_THIRD, rel=1e-14)

    def test_nearest_neighbor_limit(self):
        assert effective_hopping(math.inf, 2.5) == 2.5

    def test_monotone_in_alpha(self):
        values = [effective_hopping(a) for a in (0.0, 0.5, 1.0, 2.0, 8.0)]
        assert values == sorted(values)


class TestThresholds:
    def test_w1_alpha_reference(self):
        assert w1_alpha(3200, 1 / 3) == pytest.approx(W1_3200_THIRD, rel=1e-12)

    def test_w1_alpha_vanishes_at_alpha_zero(self):
        assert w1_alpha(50, 0.0) == 0.0

    def test_w1_alpha_decreases_with_size(self):
        values = [w1_alpha(n, 0.5) for n in (8, 16, 64, 512, 4096)]
        assert values == sorted(values, reverse=True)

    def test_all_to_all_family(self):
        assert w1_zero(100, 1.0) == pytest.approx(W1_100, rel=1e-12)
        assert w2_zero(100, 1.0) == pytest.approx(W2_100, rel=1e-12)
        assert w_gap_zero(100, 1.0) == pytest.approx(WGAP_100, rel=1e-12)

    def test_w2_over_w1_is_sqrt_n(self):
        for n in (16, 100, 1024):
            assert w2_zero(n, 0.7) / w1_zero(n, 0.7) == pytest.approx(math.sqrt(n), rel=1e-12)

    def test_localization_length(self):
        assert localization_length(1.0, 10.0) == pytest.approx(1.052, rel=1e-12)
        assert localization_length(2.0, 2.0) == pytest.approx(105.2, rel=1e-12)
        assert localization_length(1.0, 1.0) / localization_length(1.0, 2.0) == pytest.approx(4.0)
        with pytest.raises(TheoryError):
            localization_length(1.0, 0.0)


class TestCAlpha:
    def test_all_to_all(self):
        assert c_alpha(200, 0.0) == pytest.approx(99.0, rel=1e-12)

    def test_one_third_reference(self):
        assert c_alpha(3200, 1 / 3) == pytest.approx(C_3200_THIRD, rel=1e-12)

    def test_continuous_at_one(self):
        limit = math.log(100.0)
        assert c_alpha(200, 1.0) == pytest.approx(limit, rel=1e-12)
        assert c_alpha(200, 1.0 - 1e-6) == pytest.approx(limit, rel=1e-5)
        assert c_alpha(200, 1.0 + 1e-6) == pytest.approx(limit, rel=1e-5)


class TestGapTheory:
    def test_zero_disorder_limit(self):
        n, alpha, gamma = 400, 0.5, 1.0
        assert gap_theory(0.0, gamma, n, alpha) == pytest.approx(
            2.0 * gamma * c_alpha(n, alpha), rel=1e-12
        )

    def test_strong_disorder_asymptotics(self):
        n, alpha, gamma = 400, 1 / 3, 1.0
        c = c_alpha(n, alpha)
        w = 12.0 * gamma * c  # x = 6 >= 5
        assert gap_theory(w, gamma, n, alpha) == pytest.approx(
            w * math.exp(-w / (2 * gamma * c)), rel=0.01
        )

    def test_no_overflow_deep_in_the_tail(self):
        assert gap_theory(1e6, 1e-3, 400, 1 / 3) >= 0.0

    def test_all_to_all_reduction(self):
        # at alpha=0 the estimate reduces to W / (exp(W/(gamma(N-2))) - 1)
        n, w, gamma = 128, 37.0, 1.0
        expected = w / math.expm1(w / (gamma * (n - 2)))
        assert gap_theory(w, gamma, n, 0.0) == pytest.approx(expected, rel=1e-12)


class TestGapThresholds:
    def test_w_gap_alpha_reference(self):
        assert w_gap_alpha(3200, 1 / 3) == pytest.approx(WGAP_3200_THIRD, rel=1e-12)

    def test_monotone_decreasing_in_alpha(self):
        values = [w_gap_alpha(3200, a) for a in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert values == sorted(values, reverse=True)

    def test_gamma_critical_reference(self):
        assert gamma_critical(1.0, 3200, 1 / 3) == pytest.approx(GAMMA_CR_3200, rel=1e-12)

    def test_gamma_critical_linear_in_w(self):
        assert gamma_critical(2.0, 400, 0.5) == pytest.approx(
            2.0 * gamma_critical(1.0, 400, 0.5), rel=1e-12
        )

    def test_inversion_identity(self):
        w = 5.5
        assert w_gap_alpha(800, 2 / 3, gamma_critical(w, 800, 2 / 3)) == pytest.approx(
            w, rel=1e-12
        )


class TestCleanSpectrum:
    def test_all_to_all_ground_energy(self):
        energies = eq_lr_spectrum(8, 0.0)
        assert energies[-1] == pytest.approx(-7.0, abs=1e-12)  # q = N

    def test_nearest_neighbor_ring(self):
        q = np.arange(1, 9)
        np.testing.assert_allclose(
            eq_lr_spectrum(8, math.inf), -2.0 * np.cos(2 * np.pi * q / 8), atol=1e-12
        )

    def test_scaling_exponent(self):
        assert gap_scaling_exponent(0.0) == 1.0
        assert gap_scaling_exponent(4.0) == -2.0
        assert gap_scaling_exponent(3.0) == -2.0 or gap_scaling_exponent(3.0) == pytest.approx(-2.0)


class TestSpectralRadius:
    def test_two_term_sum(self):
        assert spectral_radius_sum(8, 2.0) == pytest.approx(4.0 * (1 + 1 / 9), rel=1e-14)

    def test_single_term(self):
        for alpha in (0.5, 1.0, 3.0):
            assert spectral_radius_sum(4, alpha) == pytest.approx(4.0, rel=1e-14)

    def test_requires_multiple_of_four(self):
        with pytest.raises(TheoryError):
            spectral_radius_sum(10, 2.0)

    def test_zeta_limit(self):
        assert spectral_radius_limit(2.0) == pytest.approx(RADIUS_ZETA_2, rel=1e-12)
        assert spectral_radius_limit(50.0) == pytest.approx(4.0, rel=1e-12)
        assert spectral_radius_limit(math.inf) == 4.0
        with pytest.raises(TheoryError):
            spectral_radius_limit(1.0)

    def test_sum_converges_to_limit(self):
        limit = spectral_radius_limit(3.0)
        assert abs(spectral_radius_sum(3200, 3.0) - limit) / limit < 1e-3

    def test_matches_closed_spectrum(self):
        for n in (8, 16, 64):
            for alpha in (1.5, 2.0, 3.0):
                spectrum = eq_lr_spectrum(n, alpha)
                assert spectral_radius_sum(n, alpha) == pytest.approx(
                    float(spectrum.max() - spectrum.min()), abs=1e-10
                ), (n, alpha)


class TestWPeak:
    def test_limit_composition(self):
        assert w_peak(2.0) == pytest.approx(WPEAK_2_INF, rel=1e-12)

    def test_finite_size_composition(self):
        assert w_peak(2.0, n=8) == pytest.approx(WPEAK_2_N8, rel=1e-12)

    def test_monotone_decreasing_in_alpha(self):
        values = [w_peak(a, n=3200) for a in (1.5, 2.0, 3.0, 4.0, 5.0)]
        assert values == sorted(values, reverse=True)


class TestPredictThresholds:
    def test_strong_long_range_set(self):
        params = ChainParams(n_sites=3200, alpha=1 / 3)
        ts = predict_thresholds(params, w_for_gamma_cr=1.0)
        assert ts.omega_alpha == pytest.approx(OMEGA_THIRD, rel=1e-12)
        assert ts.w1_alpha == pytest.approx(W1_3200_THIRD, rel=1e-12)
        assert ts.w_gap_alpha == pytest.approx(WGAP_3200_THIRD, rel=1e-12)
        assert ts.gamma_cr == pytest.approx(GAMMA_CR_3200, rel=1e-12)
        assert ts.delta_e_limit is None
        assert ts.w_peak is None

    def test_all_to_all_set(self):
        params = ChainParams(n_sites=100, alpha=0.0, omega_nn=1.0)
        ts = predict_thresholds(params, w_for_gamma_cr=1.0)
        assert ts.w1_zero == pytest.approx(W1_100, rel=1e-12)
        assert ts.w2_zero == pytest.approx(W2_100, rel=1e-12)
        assert ts.w_gap_zero == pytest.approx(WGAP_100, rel=1e-12)

    def test_short_range_gating(self):
        params = ChainParams(n_sites=3200, alpha=5.0)
        ts = predict_thresholds(params, w_for_gamma_cr=1.0)
        assert ts.c_alpha is None
        assert ts.w_gap_alpha is None
        assert ts.gamma_cr is None
        assert ts.delta_e_sum is not None
        assert ts.delta_e_limit is not None
        assert ts.w_peak is not None

    def test_regime_ordering(self):
        # a DET window requires W1 < W_GAP, widening with system size
        for alpha in (1 / 3, 0.5, 0.9):
            w1_small, wg_small = w1_alpha(200, alpha), w_gap_alpha(200, alpha)
            w1_large, wg_large = w1_alpha(3200, alpha), w_gap_alpha(3200, alpha)
            assert w1_small < wg_small
            assert w1_large < w1_small
            assert wg_large > wg_small
