import math

import numpy as np
import pytest

from detchain.diagnostics import (
    DiagnosticsError,
    collapse_spread,
    first_excited_vs_disorder,
    fitted_e2_slope,
    gap_vs_gamma,
    most_conducting_state,
    participation_ratio,
    pr_collapse_curve,
)
from detchain.model import ChainParams
from detchain.theory import gap_theory


class TestParticipationRatio:
    def test_uniform_state(self):
        n = 37
        assert participation_ratio(np.full(n, 1 / math.sqrt(n))) == pytest.approx(n, rel=1e-12)

    def test_basis_state(self):
        v = np.zeros(12)
        v[3] = 1.0
        assert participation_ratio(v) == pytest.approx(1.0, rel=1e-12)

    def test_two_site_superposition(self):
        v = np.zeros(6)
        v[1] = v[4] = 1 / math.sqrt(2)
        assert participation_ratio(v) == pytest.approx(2.0, rel=1e-12)

    def test_requires_normalized_input(self):
        with pytest.raises(DiagnosticsError):
            participation_ratio(np.ones(4))

    def test_phase_and_permutation_invariance(self):
        rng = np.random.default_rng(7)
        v = rng.normal(size=9) + 1j * rng.normal(size=9)
        v /= np.linalg.norm(v)
        pr = participation_ratio(v)
        assert participation_ratio(v * np.exp(0.7j)) == pytest.approx(pr, rel=1e-12)
        assert participation_ratio(v[rng.permutation(9)]) == pytest.approx(pr, rel=1e-12)

    def test_bounds_on_eigenstates(self):
        from detchain.model import build_effective_hamiltonian, build_hamiltonian, sample_disorder
        from detchain.spectral import eig_biorthogonal

        p = ChainParams(n_sites=24, alpha=0.5)
        d = sample_disorder(p, 3.0, 1, 0)
        spec = eig_biorthogonal(build_effective_hamiltonian(build_hamiltonian(p, d), 1.0))
        for k in range(p.n_sites):
            v = spec.right_vectors[:, k]
            v = v / np.linalg.norm(v)
            pr = participation_ratio(v)
            assert 1.0 - 1e-9 <= pr <= p.n_sites + 1e-9


class TestMostConductingState:
    def test_single_realization_degenerate_selection(self):
        p = ChainParams(n_sites=12, alpha=2 / 3)
        profile = most_conducting_state(p, 1.0, seed=5, n_realizations=1)
        assert profile.probabilities.sum() == pytest.approx(1.0, abs=1e-8)
        assert not profile.divergent
        assert profile.realization_index == 0

    def test_clean_all_to_all_selects_dark_state(self):
        p = ChainParams(n_sites=4, alpha=0.0)
        profile = most_conducting_state(p, 0.0, seed=0, n_realizations=2)
        assert profile.divergent
        assert math.isinf(profile.tau_contrib)

    def test_deterministic(self):
        p = ChainParams(n_sites=10, alpha=0.5)
        a = most_conducting_state(p, 2.0, seed=9, n_realizations=3)
        b = most_conducting_state(p, 2.0, seed=9, n_realizations=3)
        assert a.state_index == b.state_index
        assert a.realization_index == b.realization_index
        np.testing.assert_array_equal(a.probabilities, b.probabilities)

    def test_needs_realizations(self):
        p = ChainParams(n_sites=4, alpha=1.0)
        with pytest.raises(DiagnosticsError):
            most_conducting_state(p, 1.0, seed=0, n_realizations=0)


class TestPrCollapse:
    def test_rejects_all_to_all(self):
        with pytest.raises(DiagnosticsError):
            pr_collapse_curve([0.0], 16, [1.0], n_realizations=1)

    def test_common_grid_and_bounds(self):
        rows = pr_collapse_curve(
            [1 / 3, 2 / 3], 16, [0.5, 5.0, 50.0], seed=3, n_realizations=4
        )
        xs = sorted({row["w_over_hop"] for row in rows})
        assert xs == [0.5, 5.0, 50.0]
        assert all(0.0 < row["pr_over_n"] <= 1.0 for row in rows)
        spread = collapse_spread(rows)
        assert 0.0 <= spread <= 1.0

    def test_strong_disorder_localizes(self):
        rows = pr_collapse_curve([0.5], 24, [1e4], seed=4, n_realizations=6)
        # deep localization: PR/N near 1/N
        assert rows[0]["pr_over_n"] < 5.0 / 24


class TestFirstExcited:
    def test_large_disorder_linear(self):
        p = ChainParams(n_sites=64, alpha=1 / 3)
        rows = first_excited_vs_disorder(p, [100.0, 1000.0], n_realizations=30, seed=2)
        slope = fitted_e2_slope(rows)
        assert slope == pytest.approx(0.5, abs=0.05)

    def test_clean_all_to_all_band_edge(self, clean_disorder):
        # with no disorder |E2| equals the degenerate band energy gamma
        p = ChainParams(n_sites=32, alpha=0.0)
        rows = first_excited_vs_disorder(p, [1e-12], n_realizations=2, seed=0)
        assert rows[0]["median_abs_e2"] == pytest.approx(1.0, rel=1e-6)


class TestGapVsGamma:
    def test_weak_hopping_gap_is_level_spacing_scale(self):
        n, alpha, w = 64, 1 / 3, 1.0
        rows = gap_vs_gamma(n, alpha, w, [1e-6], n_realizations=40, seed=1)
        # decoupled sites: median gap of uniform order statistics ~ ln(2) W/(N+1)
        expected = math.log(2.0) * w / (n + 1)
        assert rows[0]["gap_numeric"] == pytest.approx(expected, rel=0.5)

    def test_strong_hopping_matches_estimate(self):
        n, alpha, w = 64, 1 / 3, 1.0
        rows = gap_vs_gamma(n, alpha, w, [1.0], n_realizations=10, seed=1)
        assert rows[0]["gap_numeric"] == pytest.approx(
            gap_theory(w, 1.0, n, alpha), rel=0.5
        )
        assert rows[0]["gap_theory"] == gap_theory(w, 1.0, n, alpha)
