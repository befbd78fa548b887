"""Binned eigenvalue estimates: the exact weights and their Fourier estimator.

Bins are centred at ``w_j = j*eta - 1/2`` for ``j = 0..M``, ``M = floor(1/eta)``.
The exact weight of bin ``j`` is ``p_j = sum_i f(lambda_i - w_j) weight_i``;
the estimator is ``q_j = Re sum_{t=-T}^{T} exp(i t w_j) F_t g(-t)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from binspec import indicator as ind_mod
from binspec.errors import ValidationError
from binspec.indicator import IndicatorFunction
from binspec.spectrum import Spectrum
from binspec.timeseries import TimeSeries, exact_series


def bin_centers(eta: float) -> np.ndarray:
    return np.arange(ind_mod.n_bins(eta)) * eta - 0.5


@dataclass
class BinnedEstimate:
    eta: float
    values: np.ndarray
    indicator_kind: str
    provenance: str
    truncation_T: int = 0
    epsilon_target: float | None = None
    imag_residue: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (ind_mod.n_bins(self.eta),):
            raise ValidationError("values must have length floor(1/eta) + 1")
        if self.provenance not in ("exact_p", "estimated_q"):
            raise ValidationError(f"unknown provenance {self.provenance!r}")

    @property
    def centers(self) -> np.ndarray:
        return bin_centers(self.eta)

    def l1_distance(self, other: "BinnedEstimate") -> float:
        return float(np.abs(self.values - other.values).sum())

    def clipped(self) -> "BinnedEstimate":
        """Values clipped to ``[0, 1]`` and rescaled to the original total.

        Optional post-processing; the error guarantees refer to the raw
        estimator.
        """
        total = self.values.sum()
        v = np.clip(self.values, 0.0, 1.0)
        if v.sum() > 0 and total > 0:
            v = v * (total / v.sum())
        return BinnedEstimate(self.eta, v, self.indicator_kind, self.provenance,
                              self.truncation_T, self.epsilon_target, self.imag_residue)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "centers": self.centers.tolist(),
            "values": self.values.tolist(),
            "truncation_T": int(self.truncation_T),
            "indicator_kind": self.indicator_kind,
            "epsilon_target": self.epsilon_target,
            "provenance": self.provenance,
            "imag_residue": self.imag_residue,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BinnedEstimate":
        try:
            return cls(float(d["eta"]), d["values"], d["indicator_kind"], d["provenance"],
                       int(d.get("truncation_T", 0)), d.get("epsilon_target"),
                       float(d.get("imag_residue", 0.0)))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed binned estimate: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n")

    @classmethod
    def load(cls, path) -> "BinnedEstimate":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("j,w_j,value\n")
            for j, (w, v) in enumerate(zip(self.centers.tolist(), self.values.tolist())):
                fh.write(f"{j},{w!r},{v!r}\n")


def exact_p(s: Spectrum, ind: IndicatorFunction, epsilon_target: float | None = None) -> BinnedEstimate:
    """Brute-force bin weights ``p_j``."""
    w = bin_centers(ind.eta)
    diff = np.subtract.outer(s.eigenvalues, w)
    # only |lambda - w_j| < eta contributes; avoid quadrature on the rest
    near = np.abs(diff) < ind.eta
    vals = np.zeros_like(diff)
    if near.any():
        vals[near] = ind_mod.value(ind, diff[near])
    p = s.weights @ vals
    return BinnedEstimate(ind.eta, p, ind.kind, "exact_p", 0, epsilon_target)


def estimate_q(
    g: TimeSeries,
    ind: IndicatorFunction,
    T: int,
    epsilon_target: float | None = None,
    coeffs: np.ndarray | None = None,
) -> BinnedEstimate:
    """Truncated Fourier estimate ``q_j`` from time-series samples.

    Uses the samples at negative times directly. ``coeffs`` may carry
    precomputed ``F_t`` for ``t = -T..T``.
    """
    if T < 0:
        raise ValidationError("T must be >= 0")
    if T > g.max_t:
        raise ValidationError(f"T={T} exceeds available series (max_t={g.max_t})")
    ts = np.arange(-T, T + 1)
    F = ind_mod.fourier_coeffs(ind, T) if coeffs is None else np.asarray(coeffs)
    g_neg = g.at(-ts)
    w = bin_centers(ind.eta)
    phases = np.exp(1j * np.multiply.outer(w, ts))
    q = phases @ (F * g_neg)
    return BinnedEstimate(ind.eta, q.real, ind.kind, "estimated_q", T, epsilon_target,
                          float(np.max(np.abs(q.imag))))


def truncation_residual(s: Spectrum, ind: IndicatorFunction, T: int) -> float:
    """``||p - p'||_1`` where ``p'`` is the estimator on the exact series."""
    p = exact_p(s, ind)
    q = estimate_q(exact_series(s, T), ind, T)
    return p.l1_distance(q)
