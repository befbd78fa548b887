"""Compare the two bin shapes: values, Fourier decay and truncation times.

Run: python demos/indicators_and_bounds.py
"""

import numpy as np

from binspec import indicator as ind
from binspec.indicator import IndicatorFunction

eta = 0.1
cos2 = IndicatorFunction.cos2(eta)
bump = IndicatorFunction.somma(eta)

print("w/eta   cos2      bump")
for frac in np.linspace(-1, 1, 9):
    w = frac * eta
    print(f"{frac:+.2f}  {ind.value(cos2, w):.6f}  {ind.value(bump, w):.6f}")

# neighbouring bins overlap so that their sum is flat
w = np.linspace(0, eta, 5)
print("\nf(w) + f(w - eta) on [0, eta]:", ind.value(cos2, w) + ind.value(cos2, w - eta))

print("\n   t   |F_t| cos2    |F_t| bump    bump envelope")
for t in (0, 10, 31, 100, 300, 1000):
    env = ind.decay_bound_somma(eta, t) if t >= 1 / eta else float("nan")
    print(f"{t:5d}  {abs(ind.fourier_coeff(cos2, t)):.3e}    "
          f"{abs(ind.fourier_coeff(bump, t)):.3e}    {env:.3e}")

print("\n eta    eps     T_cos2     T_bump   T_numeric")
for eta_ in (0.25, 0.1, 0.05, 0.01):
    for eps in (0.1, 0.01):
        print(f"{eta_:5.2f}  {eps:5.2f}  {ind.min_time_cos2(eta_, eps):9.1f}  "
              f"{ind.min_time_somma(eta_, eps):9.1f}  {ind.numeric_time_cos2(eta_, eps):9d}")
