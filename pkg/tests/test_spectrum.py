import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binspec.errors import ValidationError
from binspec.spectrum import (
    HamiltonianMatrix,
    Spectrum,
    build_fermi_hubbard,
    diagonalize,
    load_spectrum,
    rescale_to_promise,
    save_spectrum,
    synthetic_spectrum,
)

_I = np.eye(2)
_Z = np.diag([1.0, -1.0])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>


def jw_annihilator(k, n_modes):
    """Dense a_k with bit k of the basis index as mode k (kron order puts
    mode n-1 leftmost)."""
    factors = []
    for mode in reversed(range(n_modes)):
        if mode < k:
            factors.append(_Z)
        elif mode == k:
            factors.append(_LOWER)
        else:
            factors.append(_I)
    return reduce(np.kron, factors)


def fh_oracle(lx, ly, u, v, spinful):
    n_spin = 2 if spinful else 1
    n_modes = lx * ly * n_spin
    a = [jw_annihilator(k, n_modes) for k in range(n_modes)]
    n_op = [op.T @ op for op in a]
    H = np.zeros((2**n_modes, 2**n_modes))
    site = lambda x, y: x * ly + y
    bonds = []
    for x in range(lx):
        for y in range(ly):
            if x + 1 < lx:
                bonds.append((site(x, y), site(x + 1, y)))
            if y + 1 < ly:
                bonds.append((site(x, y), site(x, y + 1)))
    for i, j in bonds:
        for s in range(n_spin):
            p, q = i * n_spin + s, j * n_spin + s
            H += v * (a[p].T @ a[q] + a[q].T @ a[p])
    if spinful:
        for i in range(lx * ly):
            H += u * n_op[2 * i] @ n_op[2 * i + 1]
    return H


class TestFermiHubbard:
    @pytest.mark.parametrize("lx,ly,spinful", [(2, 1, True), (2, 2, False), (3, 1, True), (2, 2, True)])
    def test_matches_kron_construction(self, lx, ly, spinful):
        u, v = 2.5, -0.7
        h = build_fermi_hubbard(lx, u, v, spinful=spinful, ly=ly)
        np.testing.assert_allclose(h.entries, fh_oracle(lx, ly, u, v, spinful), atol=1e-14)

    def test_particle_sector_is_block(self):
        full = fh_oracle(2, 2, 1.3, 0.4, True)
        idx = [s for s in range(256) if bin(s).count("1") == 3]
        h = build_fermi_hubbard(2, 1.3, 0.4, spinful=True, particle_sector=3)
        np.testing.assert_allclose(h.entries, full[np.ix_(idx, idx)], atol=1e-14)

    def test_two_site_half_filling_ground_energy(self):
        u, v = 4.0, 1.0
        s = diagonalize(build_fermi_hubbard(2, u, v, ly=1, particle_sector=2))
        assert s.eigenvalues[0] == pytest.approx((u - np.sqrt(u**2 + 16 * v**2)) / 2, abs=1e-12)

    def test_spinless_dimer_fock_space(self):
        s = diagonalize(build_fermi_hubbard(2, 0.0, 1.0, spinful=False, ly=1))
        assert s.dimension == 4
        np.testing.assert_allclose(s.eigenvalues, [-1, 0, 0, 1], atol=1e-14)

    def test_spinless_plaquette_single_particle(self):
        s = diagonalize(build_fermi_hubbard(2, 0.0, 1.0, spinful=False, particle_sector=1))
        np.testing.assert_allclose(s.eigenvalues, [-2, 0, 0, 2], atol=1e-14)

    def test_dimension_cap(self):
        with pytest.raises(ValidationError):
            build_fermi_hubbard(3, 1.0, 1.0)  # 2^18 states

    def test_invalid_sector(self):
        with pytest.raises(ValidationError):
            build_fermi_hubbard(2, 1.0, 1.0, spinful=False, particle_sector=5)


class TestHamiltonianMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            HamiltonianMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            HamiltonianMatrix(np.zeros((2, 3)))


class TestSpectrum:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, 0.1], [0.5, 0.6])

    def test_rejects_negative_weight(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, 0.1], [1.5, -0.5])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, np.nan], [0.5, 0.5])

    def test_promise(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, 0.6], [0.5, 0.5]).check_promise()

    def test_maximally_mixed(self):
        s = Spectrum([-0.1, 0.2], [0.9, 0.1]).maximally_mixed()
        np.testing.assert_allclose(s.weights, 0.5)


class TestRescale:
    def test_exact_scale(self):
        s = rescale_to_promise(np.array([-3.0, 1.0, 2.0]))
        assert s.scale_factor == 6.0
        assert s.eigenvalues.min() == -0.5

    def test_bound_scale(self):
        s = rescale_to_promise(np.array([-3.0, 1.0]), bound=10.0)
        np.testing.assert_allclose(s.eigenvalues, [-0.3, 0.1])

    def test_bound_too_small(self):
        with pytest.raises(ValidationError):
            rescale_to_promise(np.array([-3.0, 1.0]), bound=4.0)

    def test_zero_spectrum(self):
        assert rescale_to_promise(np.zeros(3)).scale_factor == 1.0

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
    def test_always_inside_window(self, vals):
        s = rescale_to_promise(np.array(vals))
        assert np.all(np.abs(s.eigenvalues) <= 0.5)
        # ordering and ratios survive
        assert np.all(np.diff(s.eigenvalues) >= 0)


class TestSynthetic:
    @pytest.mark.parametrize("kind", ["uniform", "gapped", "clustered"])
    def test_reproducible_and_in_window(self, kind):
        a = synthetic_spectrum(kind, 128, 7)
        b = synthetic_spectrum(kind, 128, 7)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
        assert np.all(np.abs(a.eigenvalues) <= 0.5)

    def test_gap_is_empty(self):
        s = synthetic_spectrum("gapped", 2000, 1, gap=(-0.1, 0.1))
        assert not np.any((s.eigenvalues > -0.1) & (s.eigenvalues < 0.1))

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            synthetic_spectrum("poisson", 4, 0)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        s = synthetic_spectrum("clustered", 33, 3)
        save_spectrum(s, tmp_path / "s.json")
        t = load_spectrum(tmp_path / "s.json")
        np.testing.assert_array_equal(s.eigenvalues, t.eigenvalues)
        np.testing.assert_array_equal(s.weights, t.weights)
        assert t.source == s.source

    @pytest.mark.parametrize("payload", [
        '{"eigenvalues": [0.1, NaN], "weights": [0.5, 0.5]}',
        '{"eigenvalues": [0.1, 0.7], "weights": [0.5, 0.5]}',
        '{"eigenvalues": [0.1], "weights": [1.0, 0.0]}',
        '{"weights": [1.0]}',
        "[1, 2]",
        "{",
    ])
    def test_rejects_bad_files(self, tmp_path, payload):
        p = tmp_path / "bad.json"
        p.write_text(payload)
        with pytest.raises(ValidationError):
            load_spectrum(p)

    def test_json_shape(self, tmp_path):
        s = Spectrum([-0.25, 0.25], [0.5, 0.5], 2.0, "two")
        save_spectrum(s, tmp_path / "s.json")
        d = json.loads((tmp_path / "s.json").read_text())
        assert {"eigenvalues", "weights", "scale_factor", "source"} <= set(d)
