import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binspec import indicator as ind
from binspec.errors import ValidationError
from binspec.indicator import IndicatorFunction
from binspec.qeep import BinnedEstimate, bin_centers, estimate_q, exact_p, truncation_residual
from binspec.spectrum import Spectrum, synthetic_spectrum
from binspec.timeseries import exact_series, sampled_series


def p_oracle(s, eta):
    M = math.floor(1 / eta + 1e-9)
    out = np.zeros(M + 1)
    for j in range(M + 1):
        w = j * eta - 0.5
        for lam, wt in zip(s.eigenvalues, s.weights):
            if abs(lam - w) < eta:
                out[j] += wt * math.cos(math.pi * (lam - w) / (2 * eta)) ** 2
    return out


spectra = st.builds(
    synthetic_spectrum,
    st.sampled_from(["uniform", "gapped", "clustered"]),
    st.integers(1, 80),
    st.integers(0, 2**32 - 1),
)


class TestBins:
    def test_centers(self):
        np.testing.assert_allclose(bin_centers(0.25), [-0.5, -0.25, 0.0, 0.25, 0.5])
        assert bin_centers(0.3).size == 4

    def test_length_checked(self):
        with pytest.raises(ValidationError):
            BinnedEstimate(0.25, np.zeros(4), "cos2", "exact_p")


class TestExactP:
    @settings(max_examples=40, deadline=None)
    @given(spectra, st.sampled_from([0.05, 0.1, 0.15, 0.3, 1 / 7]))
    def test_matches_double_loop(self, s, eta):
        got = exact_p(s, IndicatorFunction.cos2(eta)).values
        np.testing.assert_allclose(got, p_oracle(s, eta), atol=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(spectra, st.sampled_from([0.05, 0.1, 0.125, 0.25, 0.5]), st.sampled_from(ind.KINDS))
    def test_mass_conserved_when_bins_tile(self, s, eta, kind):
        p = exact_p(s, IndicatorFunction.make(kind, eta))
        assert p.values.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(p.values >= -1e-15)

    @pytest.mark.parametrize("kind", ind.KINDS)
    def test_eigenvalue_on_center(self, kind):
        s = Spectrum([0.0], [1.0])
        p = exact_p(s, IndicatorFunction.make(kind, 0.25))
        np.testing.assert_allclose(p.values, [0, 0, 1, 0, 0], atol=1e-12)


class TestEstimator:
    @settings(max_examples=25, deadline=None)
    @given(spectra, st.sampled_from([0.1, 0.2, 0.3]), st.integers(40, 400))
    def test_truncation_error_bounded_by_tail(self, s, eta, T):
        f = IndicatorFunction.cos2(eta)
        # |q_j - p_j| <= sum_{|t| > T} |F_t| for every bin
        bound = ind.n_bins(eta) * ind.cos2_tail(eta, T, n_exact=10**5)
        assert truncation_residual(s, f, T) <= bound + 1e-12

    def test_somma_error_bounded_by_decay_envelope(self):
        s = synthetic_spectrum("uniform", 40, 2)
        eta, T = 0.2, 400
        f = IndicatorFunction.somma(eta)
        ts = np.arange(T + 1, 10**6)
        tail = 2 * float(ind.decay_bound_somma(eta, ts, alpha=1.0).sum())
        assert truncation_residual(s, f, T) <= ind.n_bins(eta) * tail

    def test_noise_propagation_bound(self):
        s = synthetic_spectrum("clustered", 64, 9)
        eta, T = 0.2, 46
        f = IndicatorFunction.cos2(eta)
        g0 = exact_series(s, T)
        g1 = sampled_series(s, T, 0.2, 0.8, seed=3, shots=5000)
        q0, q1 = estimate_q(g0, f, T), estimate_q(g1, f, T)
        F = ind.fourier_coeffs(f, T)
        bound = ind.n_bins(eta) * float(np.abs(F) @ np.abs(g1.samples - g0.samples))
        assert 0 < q1.l1_distance(q0) <= bound

    def test_real_output_from_symmetric_series(self):
        s = synthetic_spectrum("gapped", 30, 0)
        q = estimate_q(exact_series(s, 100), IndicatorFunction.cos2(0.1), 100)
        assert q.imag_residue < 1e-14

    def test_short_series_rejected(self):
        g = exact_series(Spectrum([0.0], [1.0]), 10)
        with pytest.raises(ValidationError):
            estimate_q(g, IndicatorFunction.cos2(0.1), 11)

    def test_uses_shorter_window(self):
        s = synthetic_spectrum("uniform", 10, 1)
        f = IndicatorFunction.cos2(0.1)
        a = estimate_q(exact_series(s, 50), f, 30)
        b = estimate_q(exact_series(s, 30), f, 30)
        np.testing.assert_allclose(a.values, b.values, atol=1e-15)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        s = synthetic_spectrum("uniform", 10, 1)
        q = estimate_q(exact_series(s, 30), IndicatorFunction.cos2(0.1), 30, 0.1)
        q.save(tmp_path / "q.json")
        r = BinnedEstimate.load(tmp_path / "q.json")
        np.testing.assert_array_equal(q.values, r.values)
        assert (r.truncation_T, r.provenance, r.epsilon_target) == (30, "estimated_q", 0.1)

    def test_csv(self, tmp_path):
        p = exact_p(Spectrum([0.0], [1.0]), IndicatorFunction.cos2(0.5))
        p.save_csv(tmp_path / "p.csv")
        assert (tmp_path / "p.csv").read_text().splitlines() == [
            "j,w_j,value", "0,-0.5,0.0", "1,0.0,1.0", "2,0.5,0.0",
        ]

    def test_malformed(self):
        with pytest.raises(ValidationError):
            BinnedEstimate.from_dict({"eta": 0.5})

    def test_clipped_keeps_total(self):
        q = BinnedEstimate(0.5, [-0.1, 0.8, 0.3], "cos2", "estimated_q")
        c = q.clipped()
        assert c.values.min() >= 0
        assert c.values.sum() == pytest.approx(q.values.sum())
