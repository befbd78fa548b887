"""Randomized eigenvalue counting on top of binned estimates.

Breakpoints ``x_1 < ... < x_m`` are drawn one per segment of width
``xi/2``, the binned estimator is run with

    eta = Delta / (6 * 2D * (m+1)^2),    eps = Delta / (8 * 2D),

(``D`` the Hilbert-space dimension) and interval counts are sandwiched
between a lower envelope (bins well inside an interval) and an upper
envelope (bins touching it). The subloop is repeated
``ceil(log(1-c) / log(1-c/2))`` times and the repetition with the tightest
envelopes is returned.

Intervals are ``B_i = [x_{i-1}, x_i)`` for ``i = 1..m+1``; the last one is
closed at ``+1/2`` so every eigenvalue in the window is counted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from binspec import indicator as ind_mod
from binspec.errors import NoBinsAchievable, ValidationError
from binspec.indicator import IndicatorFunction
from binspec.qeep import BinnedEstimate, estimate_q, exact_p
from binspec.spectrum import Spectrum
from binspec.timeseries import exact_series, sampled_series


@dataclass(frozen=True)
class RQeepParams:
    xi: float
    delta: float
    confidence: float
    dimension: int

    def __post_init__(self):
        if not self.xi > 0:
            raise ValidationError("xi must be positive")
        m = 2.0 / self.xi
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise ValidationError(f"2/xi = {m!r} is not a positive integer")
        if not self.delta > 0:
            raise ValidationError("delta must be positive")
        if not 0 < self.confidence < 1:
            raise ValidationError("confidence must lie in (0, 1)")
        if self.dimension < 1:
            raise ValidationError("dimension must be >= 1")

    @property
    def m(self) -> int:
        return int(round(2.0 / self.xi))

    @property
    def qubits(self) -> float:
        return math.log2(self.dimension)


def repetitions(confidence: float) -> int:
    if not 0 < confidence < 1:
        raise ValidationError("confidence must lie in (0, 1)")
    return math.ceil(math.log(1 - confidence) / math.log(1 - confidence / 2))


def derive_qeep_params(p: RQeepParams) -> tuple[float, float, int]:
    """``(eta, epsilon, repetitions)`` for the binned subcalls.

    Raises if ``xi/eta <= 2``, where the deviation analysis breaks down.
    """
    two_d = 2 * p.dimension
    eta = p.delta / (6 * two_d * (p.m + 1) ** 2)
    eps = p.delta / (8 * two_d)
    if not p.xi / eta > 2:
        raise ValidationError(f"xi/eta = {p.xi / eta:g} must exceed 2")
    if eta > 1:
        raise ValidationError(f"derived bin width {eta:g} exceeds 1")
    return eta, eps, repetitions(p.confidence)


def inverse_params(eta: float, epsilon: float, dimension: int) -> tuple[int, float, float]:
    """Number of intervals and deviation reachable from a binned solver with
    width ``eta`` and precision ``epsilon``.

    Returns ``(m, delta, m_real)`` with ``m_real = sqrt(4 eps / (3 eta)) - 1``,
    ``m = floor(m_real)`` and ``delta = 16 * dimension * eps``.
    """
    if not (eta > 0 and epsilon > 0):
        raise ValidationError("eta and epsilon must be positive")
    if 4 * epsilon < 3 * eta:
        raise NoBinsAchievable(f"4*eps = {4 * epsilon:g} < 3*eta = {3 * eta:g}")
    m_real = math.sqrt(4 * epsilon / (3 * eta)) - 1
    # floor, tolerating m_real a rounding error below an integer
    m = int(math.floor(m_real + 1e-9))
    return m, 16.0 * dimension * epsilon, m_real


def expected_envelope_gap_bound(p: RQeepParams, eta: float) -> float:
    """Upper bound ``D * 6 eta (m+1)^2`` on the mean envelope gap of an ideal
    (noise-free) solver."""
    return p.dimension * 6 * eta * (p.m + 1) ** 2


def sample_breakpoints(xi: float, rng_seed) -> np.ndarray:
    """``[-1/2, x_1, ..., x_m, 1/2]`` with ``x_i`` uniform on segment ``i``.

    ``rng_seed`` is an int seed or a :class:`numpy.random.Generator`.
    """
    m = RQeepParams(xi, 1.0, 0.5, 1).m
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    width = 1.0 / m
    starts = -0.5 + width * np.arange(m)
    x = starts + width * rng.random(m)
    return np.concatenate([[-0.5], x, [0.5]])


def envelopes(q: BinnedEstimate, breakpoints, eta: float, dimension: int):
    """Lower, upper and midpoint interval counts from bin estimates.

    Bin ``j`` counts towards the lower envelope of interval ``i`` when
    ``w_j`` lies in ``[x_i + eta, x_{i+1} - eta]`` and towards the upper one
    when it lies in ``[x_i - eta, x_{i+1} + eta]``.
    """
    x = np.asarray(breakpoints, dtype=float)
    w = q.centers
    v = q.values
    lo_edge, hi_edge = x[:-1], x[1:]
    in_lwr = (w[None, :] >= (lo_edge + eta)[:, None]) & (w[None, :] <= (hi_edge - eta)[:, None])
    in_upr = (w[None, :] >= (lo_edge - eta)[:, None]) & (w[None, :] <= (hi_edge + eta)[:, None])
    y_lwr = dimension * (in_lwr * v).sum(axis=1)
    y_upr = dimension * (in_upr * v).sum(axis=1)
    return y_lwr, y_upr, 0.5 * (y_lwr + y_upr)


def true_counts(s: Spectrum, breakpoints) -> np.ndarray:
    """Eigenvalue counts on ``[x_{i-1}, x_i)``; the last interval is closed."""
    x = np.asarray(breakpoints, dtype=float)
    idx = np.searchsorted(x, s.eigenvalues, side="right") - 1
    idx = np.clip(idx, 0, x.size - 2)
    return np.bincount(idx, minlength=x.size - 1).astype(float)


@dataclass
class RQeepResult:
    breakpoints: np.ndarray
    y_lwr: np.ndarray
    y_upr: np.ndarray
    y: np.ndarray
    envelope_gap: float
    seed: int
    subloop_index: int
    eta: float
    epsilon: float
    delta: float
    n_true: np.ndarray | None = None

    @property
    def deviation(self) -> float | None:
        if self.n_true is None:
            return None
        return float(np.abs(self.y - self.n_true).sum())

    @property
    def success(self) -> bool | None:
        dev = self.deviation
        return None if dev is None else dev <= self.delta

    def to_dict(self) -> dict:
        d = {
            "breakpoints": self.breakpoints.tolist(),
            "y_lwr": self.y_lwr.tolist(),
            "y_upr": self.y_upr.tolist(),
            "y": self.y.tolist(),
            "envelope_gap": self.envelope_gap,
            "seed": self.seed,
            "subloop_index": self.subloop_index,
            "eta": self.eta,
            "epsilon": self.epsilon,
            "delta": self.delta,
        }
        if self.n_true is not None:
            d["n_true"] = self.n_true.tolist()
            d["deviation"] = self.deviation
            d["success"] = self.success
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n")

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["i", "x_lo", "x_hi", "y_lwr", "y_upr", "y", "n_true"])
            x = self.breakpoints
            for i in range(self.y.size):
                n = "" if self.n_true is None else repr(float(self.n_true[i]))
                wr.writerow([i + 1, repr(float(x[i])), repr(float(x[i + 1])),
                             repr(float(self.y_lwr[i])), repr(float(self.y_upr[i])),
                             repr(float(self.y[i])), n])


def run_rqeep(
    s: Spectrum,
    p: RQeepParams,
    solver: str = "exact",
    seed: int = 0,
    indicator_kind: str = "cos2",
    T: int | None = None,
    sampled: bool = False,
) -> RQeepResult:
    """Randomized interval counts for the eigenvalues of ``s``.

    ``solver="exact"`` uses the brute-force bin weights (an ideal solver);
    ``solver="estimated"`` runs the Fourier estimator at truncation ``T``
    (default: the bound for ``indicator_kind``) on the exact series, or on
    shot-sampled series with fresh noise per repetition when ``sampled``.
    The input state is taken maximally mixed regardless of ``s.weights``.
    """
    if p.dimension != s.dimension:
        raise ValidationError("params dimension does not match the spectrum")
    s.check_promise()
    eta, eps, reps = derive_qeep_params(p)
    mixed = s.maximally_mixed()
    ind = IndicatorFunction.make(indicator_kind, eta)

    seq = np.random.SeedSequence(seed)
    children = seq.spawn(reps)

    if solver == "exact":
        q_fixed = exact_p(mixed, ind, eps)
    elif solver == "estimated":
        if T is None:
            T = math.ceil(ind_mod.min_time(indicator_kind, eta, eps))
        coeffs = ind_mod.fourier_coeffs(ind, T)
        q_fixed = None if sampled else estimate_q(exact_series(mixed, T), ind, T, eps, coeffs)
    else:
        raise ValidationError(f"unknown solver {solver!r}")

    best = None
    for r, child in enumerate(children):
        bp_seed, noise_seed = (int(v) for v in child.generate_state(2))
        x = sample_breakpoints(p.xi, bp_seed)
        if q_fixed is None:
            g = sampled_series(mixed, T, eps, p.confidence, noise_seed)
            q = estimate_q(g, ind, T, eps, coeffs)
        else:
            q = q_fixed
        lo, up, y = envelopes(q, x, eta, p.dimension)
        gap = float((up - lo).sum())
        if best is None or gap < best[0]:
            best = (gap, r, x, lo, up, y)

    gap, r, x, lo, up, y = best
    return RQeepResult(x, lo, up, y, gap, seed, r, eta, eps, p.delta, true_counts(s, x))
