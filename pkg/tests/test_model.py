import math

import numpy as np
import pytest

from detchain.model import (
    ChainParams,
    DisorderRealization,
    ModelError,
    build_clean_periodic,
    build_effective_hamiltonian,
    build_hamiltonian,
    derive_seed,
    sample_disorder,
)


def test_chain_params_validation():
    with pytest.raises(ModelError):
        ChainParams(n_sites=0, alpha=1.0)
    with pytest.raises(ModelError):
        ChainParams(n_sites=4, alpha=-0.5)
    with pytest.raises(ModelError):
        ChainParams(n_sites=4, alpha=1.0, gamma=0.0)
    with pytest.raises(ModelError):
        ChainParams(n_sites=4, alpha=1.0, gamma_drain=0.0)
    with pytest.raises(ModelError):
        ChainParams(n_sites=4, alpha=1.0, boundary="twisted")
    ChainParams(n_sites=4, alpha=math.inf)  # sentinel accepted


class TestSampleDisorder:
    def test_zero_width_gives_zero_vector(self):
        p = ChainParams(n_sites=7, alpha=1.0)
        d = sample_disorder(p, 0.0, 123, 0)
        assert np.array_equal(d.energies, np.zeros(7))

    def test_uniform_moments(self):
        # mean within 0.02 of 0 and variance within 2% of W^2/12 = 1/3
        p = ChainParams(n_sites=100_000, alpha=1.0)
        d = sample_disorder(p, 2.0, 2024, 5)
        assert abs(d.energies.mean()) < 0.02
        assert abs(d.energies.var() - 1.0 / 3.0) < 0.02 / 3.0

    def test_deterministic_in_seed_and_index(self):
        p = ChainParams(n_sites=64, alpha=0.5)
        a = sample_disorder(p, 3.0, 99, 4)
        b = sample_disorder(p, 3.0, 99, 4)
        c = sample_disorder(p, 3.0, 99, 5)
        assert np.array_equal(a.energies, b.energies)
        assert not np.array_equal(a.energies, c.energies)

    def test_bounded_support(self):
        p = ChainParams(n_sites=10_000, alpha=1.0)
        d = sample_disorder(p, 5.0, 7, 0)
        assert d.energies.min() >= -2.5
        assert d.energies.max() <= 2.5

    def test_negative_width_rejected(self):
        p = ChainParams(n_sites=4, alpha=1.0)
        with pytest.raises(ModelError):
            sample_disorder(p, -1.0, 0, 0)

    def test_uniformity_ks_bound(self):
        n = 50_000
        p = ChainParams(n_sites=n, alpha=1.0)
        d = sample_disorder(p, 2.0, 31337, 0)
        u = np.sort((d.energies + 1.0) / 2.0)
        ks = np.max(np.abs(u - np.arange(1, n + 1) / n))
        assert ks < 2.0 / math.sqrt(n) * 1.63

    def test_derive_seed_stable(self):
        assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
        assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)


class TestBuildHamiltonian:
    def test_three_site_power_law(self, clean_disorder):
        p = ChainParams(n_sites=3, alpha=1.0)
        h = build_hamiltonian(p, clean_disorder(3))
        assert h[0, 1] == h[1, 2] == -1.0
        assert h[0, 2] == -0.5

    def test_all_to_all_spectrum(self, clean_disorder):
        # fully connected chain: ground state -gamma(N-1), degenerate band +gamma
        p = ChainParams(n_sites=4, alpha=0.0)
        h = build_hamiltonian(p, clean_disorder(4))
        assert np.all(h[~np.eye(4, dtype=bool)] == -1.0)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), [-3.0, 1.0, 1.0, 1.0], atol=1e-12)

    def test_two_site_with_disorder(self):
        p = ChainParams(n_sites=2, alpha=3.0)
        d = DisorderRealization([0.3, -0.3], 1.0, 0, 0)
        h = build_hamiltonian(p, d)
        np.testing.assert_array_equal(h, [[0.3, -1.0], [-1.0, -0.3]])

    def test_size_mismatch_rejected(self, clean_disorder):
        p = ChainParams(n_sites=5, alpha=1.0)
        with pytest.raises(ModelError):
            build_hamiltonian(p, clean_disorder(4))

    def test_alpha_inf_is_tridiagonal_anderson(self, clean_disorder):
        p = ChainParams(n_sites=6, alpha=math.inf, omega_nn=0.25)
        h = build_hamiltonian(p, clean_disorder(6))
        expected = np.zeros((6, 6))
        for i in range(5):
            expected[i, i + 1] = expected[i + 1, i] = -1.25
        np.testing.assert_array_equal(h, expected)

    def test_offdiagonal_monotone_in_distance(self, clean_disorder):
        for alpha in (0.0, 0.3, 1.0, 2.5, math.inf):
            p = ChainParams(n_sites=12, alpha=alpha)
            h = build_hamiltonian(p, clean_disorder(12))
            couplings = np.abs(h[0, 1:])
            assert np.all(np.diff(couplings) <= 1e-15)

    def test_symmetric(self):
        p = ChainParams(n_sites=9, alpha=0.7)
        d = sample_disorder(p, 2.0, 3, 1)
        h = build_hamiltonian(p, d)
        assert np.array_equal(h, h.T)
        np.testing.assert_array_equal(np.diag(h), d.energies)


class TestBuildCleanPeriodic:
    def test_ring_distances(self):
        p = ChainParams(n_sites=4, alpha=2.0, boundary="periodic")
        h = build_clean_periodic(p)
        assert h[0, 1] == -1.0
        assert h[0, 2] == -0.25
        assert h[0, 3] == -1.0

    def test_nearest_neighbor_ring_spectrum(self):
        p = ChainParams(n_sites=8, alpha=math.inf, boundary="periodic")
        h = build_clean_periodic(p)
        expected = np.sort(-2.0 * np.cos(2.0 * np.pi * np.arange(8) / 8))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), expected, atol=1e-12)


class TestEffectiveHamiltonian:
    def test_two_site_entries(self, clean_disorder):
        p = ChainParams(n_sites=2, alpha=1.0)
        h_eff = build_effective_hamiltonian(build_hamiltonian(p, clean_disorder(2)), 1.0)
        np.testing.assert_array_equal(h_eff, [[0.0, -1.0], [-1.0, -0.5j]])

    def test_trace_and_symmetry(self):
        p = ChainParams(n_sites=10, alpha=0.5)
        d = sample_disorder(p, 4.0, 11, 2)
        h_eff = build_effective_hamiltonian(build_hamiltonian(p, d), 2.5)
        assert h_eff.trace().imag == pytest.approx(-1.25, abs=1e-15)
        assert np.array_equal(h_eff, h_eff.T)

    def test_rejects_nonpositive_drain(self, clean_disorder):
        p = ChainParams(n_sites=3, alpha=1.0)
        h = build_hamiltonian(p, clean_disorder(3))
        with pytest.raises(ModelError):
            build_effective_hamiltonian(h, 0.0)
