"""Achievable bin width under depolarizing noise, sub-circuit versus
standard gate synthesis, for an L x L Fermi-Hubbard lattice.

Run: python demos/cost_model_sweep.py [out.csv]
"""

import sys

from binspec import costmodel as cm

scn = cm.CostScenario(L=3, epsilon=0.1)
print(f"L=3: {scn.qubits} qubits, Lambda = {scn.fermions:g}")
print("\nq_noise   budget      eta_min sub  eta_min std")
for q in (1e-5, 1e-6, 1e-7, 1e-8, 1e-9):
    budget = cm.noise_runtime_budget(scn.qubits, q, scn.target_error)
    sub = cm.achievable_eta(scn, budget).eta_min
    std = cm.achievable_eta(scn.replace(synthesis="standard"), budget).eta_min
    fmt = lambda v: "   none" if v is None else f"{v:.4f}"
    print(f"{q:.0e}  {budget:10.1f}  {fmt(sub):>11}  {fmt(std):>11}")

for kind in ("cos2", "somma"):
    s = scn.replace(indicator_kind=kind)
    sub = cm.threshold_noise(s, 0.1)
    std = cm.threshold_noise(s.replace(synthesis="standard"), 0.1)
    print(f"\n{kind}: eta = 0.1 reachable below q = {sub:.2e} (sub-circuit), {std:.2e} (standard); "
          f"ratio {sub / std:.2f}")

if len(sys.argv) > 1:
    rows = cm.figure_sweep(path=sys.argv[1])
    print(f"\nwrote {len(rows)} sweep rows to {sys.argv[1]}")
