"""The cat-state local-control circuit reproduces the time series.

Simulates H = X_a + Z_b Z_c with one ancilla per term and compares the
ancilla readout with the exact overlap.

Run: python demos/local_control.py
"""

import numpy as np

from binspec.spectrum import Spectrum
from binspec.timeseries import exact_g, hamiltonian_from_terms, simulate_local_control

terms = [(1.0, "XII"), (1.0, "IZZ")]
rng = np.random.default_rng(0)
psi = rng.normal(size=8) + 1j * rng.normal(size=8)
psi /= np.linalg.norm(psi)

evals, vecs = np.linalg.eigh(hamiltonian_from_terms(terms))
s = Spectrum(evals, np.abs(vecs.conj().T @ psi) ** 2)

print("   t    circuit readout          conj(g(t))              |diff|")
for t in (0.1, 0.5, 1.0, 2.0, 5.0):
    got = simulate_local_control(terms, t, psi)
    want = np.conj(exact_g(s, t))
    print(f"{t:4.1f}  {got.real:+.6f}{got.imag:+.6f}j  {want.real:+.6f}{want.imag:+.6f}j  {abs(got - want):.1e}")
