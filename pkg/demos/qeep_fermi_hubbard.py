"""Binned eigenvalue estimate of a small Fermi-Hubbard lattice.

Builds the 2x2 spinless model, rescales it into the promise window and
compares the exact bin weights with the Fourier estimate from exact and
shot-sampled time series.

Run: python demos/qeep_fermi_hubbard.py
"""

import math

from binspec import indicator as ind
from binspec.indicator import IndicatorFunction
from binspec.qeep import estimate_q, exact_p
from binspec.spectrum import build_fermi_hubbard, diagonalize, rescale_to_promise
from binspec.timeseries import exact_series, sampled_series

h = build_fermi_hubbard(2, u=0.0, v=1.0, spinful=False)
s = rescale_to_promise(diagonalize(h))
print(f"{h.label}: dimension {s.dimension}, scale factor {s.scale_factor:g}")
print("rescaled eigenvalues:", s.eigenvalues.round(4))

eta, eps, conf = 0.2, 0.2, 0.8
f = IndicatorFunction.cos2(eta)
T = math.ceil(ind.min_time_cos2(eta, eps))
p = exact_p(s, f)
q_exact = estimate_q(exact_series(s, T), f, T)
g = sampled_series(s, T, eps, conf, seed=1)
q_shots = estimate_q(g, f, T)

print(f"\nT = {T}, shots per quadrature per point = {g.shots_per_point:.3e}")
print("  w_j      p_j      q_j(exact g)  q_j(sampled g)")
for w, a, b, c in zip(p.centers, p.values, q_exact.values, q_shots.values):
    print(f"{w:+.2f}  {a:.6f}  {b:.6f}      {c:.6f}")
print(f"\n||q - p||_1: exact series {q_exact.l1_distance(p):.2e}, "
      f"sampled {q_shots.l1_distance(p):.2e} (target {eps})")
