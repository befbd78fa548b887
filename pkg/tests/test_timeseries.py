import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from binspec.errors import InfeasibleShotCount, ValidationError
from binspec.spectrum import Spectrum, synthetic_spectrum
from binspec.timeseries import (
    TimeSeries,
    exact_g,
    exact_series,
    hamiltonian_from_terms,
    pauli_matrix,
    sampled_series,
    shots_required,
    simulate_local_control,
)


def union_failure(n, T, eps):
    """Hoeffding union bound on P(some Re/Im estimate is off by more than
    eps / (8 (2T+1)))."""
    s = eps / (8 * (2 * T + 1))
    return 2 * (2 * T + 1) * 2 * math.exp(-n * s**2 / 2)


class TestExactSeries:
    def test_sum_of_exponentials(self):
        s = Spectrum([-0.3, 0.1, 0.2], [0.2, 0.5, 0.3])
        g = exact_series(s, 4)
        for t in range(-4, 5):
            direct = sum(w * np.exp(1j * lam * t) for lam, w in zip(s.eigenvalues, s.weights))
            assert g.at(t) == pytest.approx(direct, abs=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 50))
    def test_conjugate_symmetry_and_bound(self, seed, T):
        s = synthetic_spectrum("uniform", 17, seed)
        g = exact_series(s, T)
        np.testing.assert_array_equal(g.samples, np.conj(g.samples[::-1]))
        assert g.at(0) == 1.0
        assert np.all(np.abs(g.samples) <= 1 + 1e-12)

    def test_scalar_time(self):
        s = Spectrum([0.25], [1.0])
        assert exact_g(s, 2.0) == pytest.approx(np.exp(0.5j))

    def test_json_round_trip(self, tmp_path):
        g = exact_series(synthetic_spectrum("gapped", 8, 0), 3)
        g.save(tmp_path / "g.json")
        h = TimeSeries.load(tmp_path / "g.json")
        np.testing.assert_array_equal(g.samples, h.samples)
        assert h.mode == "exact"

    def test_malformed_json(self, tmp_path):
        (tmp_path / "g.json").write_text('{"max_t": 1, "samples": []}')
        with pytest.raises(ValidationError):
            TimeSeries.load(tmp_path / "g.json")


class TestShots:
    @pytest.mark.parametrize("T,eps,c", [(0, 0.5, 0.5), (46, 0.2, 0.8), (179, 0.1, 0.9), (1000, 0.01, 0.99)])
    def test_minimal_hoeffding_count(self, T, eps, c):
        n = shots_required(T, eps, c)
        assert union_failure(n, T, eps) <= 1 - c
        assert union_failure(n - 1, T, eps) > (1 - c) * (1 - 1e-9)

    def test_infeasible(self):
        with pytest.raises(InfeasibleShotCount):
            shots_required(10**6, 1e-6, 0.9)

    @pytest.mark.parametrize("eps,c", [(0.0, 0.5), (0.1, 1.0), (0.1, 0.0)])
    def test_invalid(self, eps, c):
        with pytest.raises(ValidationError):
            shots_required(5, eps, c)


class TestSampling:
    def test_deterministic_and_per_point(self):
        s = synthetic_spectrum("uniform", 16, 3)
        a = sampled_series(s, 10, 0.5, 0.5, seed=11, shots=1000)
        b = sampled_series(s, 10, 0.5, 0.5, seed=11, shots=1000)
        c = sampled_series(s, 4, 0.5, 0.5, seed=11, shots=1000)
        np.testing.assert_array_equal(a.samples, b.samples)
        # the draw at t does not depend on the other points requested
        np.testing.assert_array_equal(a.samples[6:15], c.samples)
        d = sampled_series(s, 10, 0.5, 0.5, seed=12, shots=1000)
        assert not np.array_equal(a.samples, d.samples)

    def test_unbiased_with_binomial_spread(self):
        s = synthetic_spectrum("clustered", 32, 5)
        n, T = 400, 200
        g = sampled_series(s, T, 0.5, 0.5, seed=1, shots=n)
        keep = g.times != 0  # g(0) = 1 exactly, zero variance
        exact = exact_series(s, T).samples[keep]
        z = (g.samples[keep].real - exact.real) / np.sqrt((1 - exact.real**2) / n)
        assert abs(z.mean()) < 4 / np.sqrt(z.size)
        assert 0.8 < z.std() < 1.2

    def test_estimates_are_pm1_means(self):
        s = Spectrum([0.0], [1.0])
        g = sampled_series(s, 3, 0.5, 0.5, seed=0, shots=7)
        k = (g.samples.real + 1) * 7 / 2
        np.testing.assert_allclose(k, np.round(k), atol=1e-12)
        assert g.shots_per_point == 7 and g.mode == "sampled"


def trace_oracle(terms, t, rho):
    H = hamiltonian_from_terms(terms)
    return np.trace(rho @ expm(-1j * t * H))


def spectrum_of(terms, psi):
    evals, vecs = np.linalg.eigh(hamiltonian_from_terms(terms))
    return Spectrum(evals, np.abs(vecs.conj().T @ psi) ** 2)


class TestLocalControl:
    TERMS = [(1.0, "XII"), (1.0, "IZZ")]

    def test_pauli_matrix_ordering(self):
        Z, I = np.diag([1, -1]), np.eye(2)
        np.testing.assert_array_equal(pauli_matrix("ZI"), np.kron(Z, I))

    @pytest.mark.parametrize("t", [0.0, 0.3, 1.7, -2.2])
    def test_pure_state_matches_trace(self, t):
        rng = np.random.default_rng(4)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi /= np.linalg.norm(psi)
        got = simulate_local_control(self.TERMS, t, psi)
        assert got == pytest.approx(trace_oracle(self.TERMS, t, np.outer(psi, psi.conj())), abs=1e-12)
        assert got == pytest.approx(np.conj(exact_g(spectrum_of(self.TERMS, psi), t)), abs=1e-12)

    def test_mixed_state(self):
        rho = np.eye(8) / 8
        got = simulate_local_control(self.TERMS, 0.9, rho)
        assert got == pytest.approx(trace_oracle(self.TERMS, 0.9, rho), abs=1e-12)

    def test_single_term(self):
        psi = np.array([1, 0], dtype=complex)
        got = simulate_local_control([(0.5, "Z")], 2.0, psi)
        assert got == pytest.approx(np.exp(-1j), abs=1e-12)

    def test_qubit_cap(self):
        terms = [(1.0, "X" * 8)] * 8
        with pytest.raises(ValidationError):
            simulate_local_control(terms, 1.0, np.eye(256)[0])

    def test_ragged_terms(self):
        with pytest.raises(ValidationError):
            simulate_local_control([(1.0, "X"), (1.0, "ZZ")], 1.0, np.eye(2)[0])
