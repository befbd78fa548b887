"""Randomized interval counts for a gapped synthetic spectrum.

Run: python demos/rqeep_interval_counts.py
"""

from binspec.rqeep import RQeepParams, derive_qeep_params, run_rqeep
from binspec.spectrum import synthetic_spectrum

dim = 64
s = synthetic_spectrum("gapped", dim, rng_seed=3, gap=(-0.15, 0.1))
params = RQeepParams(xi=2 / 3, delta=1.6 * dim, confidence=0.5, dimension=dim)
eta, eps, reps = derive_qeep_params(params)
print(f"m = {params.m} intervals past the first; subcalls use eta = {eta:.5f}, eps = {eps:g}, "
      f"{reps} repetitions")

for solver in ("exact", "estimated"):
    res = run_rqeep(s, params, solver=solver, seed=7)
    print(f"\n{solver} solver, repetition {res.subloop_index} kept (envelope gap {res.envelope_gap:.2f})")
    print("   interval            y_lwr    y_upr       y   true")
    for i in range(res.y.size):
        lo, hi = res.breakpoints[i], res.breakpoints[i + 1]
        print(f"[{lo:+.3f}, {hi:+.3f})  {res.y_lwr[i]:7.2f}  {res.y_upr[i]:7.2f}  {res.y[i]:6.2f}  "
              f"{res.n_true[i]:5.0f}")
    print(f"sum |y - n| = {res.deviation:.3f} against Delta = {res.delta:g}")
