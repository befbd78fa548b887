"""Time-series data ``g(t) = sum_n w_n exp(i lambda_n t)``.

Three sources are provided: exact evaluation from a :class:`Spectrum`,
simulated ancilla shot noise, and a statevector simulation of the
local-control (cat-state) measurement circuit.

Sampling randomness is keyed per time point: the generator for sample ``t``
is seeded from ``(seed, t >= 0, |t|)``, so any subset of points can be drawn
independently and reproducibly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from binspec.errors import InfeasibleShotCount, ValidationError
from binspec.spectrum import Spectrum

MAX_SIM_QUBITS = 14
_INT64_MAX = 2**63 - 1


@dataclass
class TimeSeries:
    """Samples ``g_t`` for ``t = -max_t..max_t``, stored at index ``t + max_t``."""

    max_t: int
    samples: np.ndarray
    mode: str = "exact"
    shots_per_point: int = 0
    seed: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (2 * self.max_t + 1,):
            raise ValidationError("samples must have length 2*max_t + 1")
        if self.mode not in ("exact", "sampled"):
            raise ValidationError(f"unknown mode {self.mode!r}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(-self.max_t, self.max_t + 1)

    def at(self, t):
        return self.samples[np.asarray(t) + self.max_t]

    def to_dict(self) -> dict:
        return {
            "max_t": int(self.max_t),
            "mode": self.mode,
            "shots_per_point": int(self.shots_per_point),
            "seed": int(self.seed),
            "samples": [
                {"t": int(t), "re": float(g.real), "im": float(g.imag)}
                for t, g in zip(self.times, self.samples)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TimeSeries":
        try:
            T = int(d["max_t"])
            by_t = {int(s["t"]): complex(float(s["re"]), float(s["im"])) for s in d["samples"]}
            samples = [by_t[t] for t in range(-T, T + 1)]
            return cls(T, np.array(samples), d["mode"], int(d["shots_per_point"]), int(d["seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed time series: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), allow_nan=False) + "\n")

    @classmethod
    def load(cls, path) -> "TimeSeries":
        return cls.from_dict(json.loads(Path(path).read_text()))


def exact_g(s: Spectrum, t):
    """``sum_n weight_n exp(i lambda_n t)``; vectorized over ``t``."""
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(1j * np.multiply.outer(t_arr, s.eigenvalues))
    out = phases @ s.weights
    return complex(out) if out.ndim == 0 else out


def exact_series(s: Spectrum, T: int) -> TimeSeries:
    if T < 0:
        raise ValidationError("T must be >= 0")
    ts = np.arange(-T, T + 1)
    g = exact_g(s, ts)
    # enforce g(-t) = conj(g(t)) exactly
    g = np.where(ts < 0, np.conj(g[::-1]), g)
    g[T] = s.weights.sum()
    return TimeSeries(T, g, "exact", 0, 0)


def shots_required(T: int, epsilon: float, confidence: float) -> int:
    """Shots per quadrature per time point so that ``||g_est - g||_1 <= eps/2``
    with probability at least ``confidence``.

    Each of the ``2(2T+1)`` real estimates (Re and Im at every ``t``) gets the
    absolute budget ``s = eps / (8 (2T+1))``. A two-sided Hoeffding bound on
    the mean of ``N`` +-1 outcomes with a union bound then needs
    ``N >= 2 ln(4(2T+1)/(1-c)) / s^2``.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if not 0 < confidence < 1:
        raise ValidationError("confidence must lie in (0, 1)")
    if T < 0:
        raise ValidationError("T must be >= 0")
    n_pts = 2 * T + 1
    budget = epsilon / (2 * 2 * n_pts)
    s = budget / 2
    n = math.ceil(2.0 * math.log(4 * n_pts / (1 - confidence)) / s**2)
    if n > _INT64_MAX:
        raise InfeasibleShotCount(f"infeasible shot count {n:.3e} per point")
    return max(n, 1)


def _point_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, int(t >= 0), abs(int(t))])


def _estimate_pm1_mean(rng: np.random.Generator, mean: float, n: int) -> float:
    p = min(max((1.0 + mean) / 2.0, 0.0), 1.0)
    k = rng.binomial(n, p)
    return 2.0 * k / n - 1.0


def sampled_series(
    s: Spectrum,
    T: int,
    epsilon: float,
    confidence: float,
    seed: int,
    shots: int | None = None,
) -> TimeSeries:
    """Shot-noise estimate of the exact series.

    At every ``t`` the X and Y ancilla measurements are simulated as ``N``
    independent +-1 outcomes with means ``Re g(t)`` and ``Im g(t)``. ``N``
    defaults to :func:`shots_required`.
    """
    n = shots_required(T, epsilon, confidence) if shots is None else int(shots)
    exact = exact_series(s, T)
    out = np.empty_like(exact.samples)
    for k, t in enumerate(exact.times.tolist()):
        rng = _point_rng(seed, t)
        g = exact.samples[k]
        out[k] = complex(_estimate_pm1_mean(rng, g.real, n), _estimate_pm1_mean(rng, g.imag, n))
    return TimeSeries(T, out, "sampled", n, seed)


# ---------------------------------------------------------------------------
# local-control statevector simulation

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string; qubit 0 is the leftmost factor."""
    return reduce(np.kron, (_PAULI[c] for c in label.upper()))


def hamiltonian_from_terms(terms) -> np.ndarray:
    """``sum_i alpha_i P_i`` for ``terms = [(alpha_i, "XZI"), ...]``."""
    return sum(a * pauli_matrix(p) for a, p in terms)


def _embed(op_on: dict[int, np.ndarray], n: int) -> np.ndarray:
    return reduce(np.kron, (op_on.get(q, _PAULI["I"]) for q in range(n)))


def _cnot(control: int, target: int, n: int) -> np.ndarray:
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    return _embed({control: p0}, n) + _embed({control: p1, target: _PAULI["X"]}, n)


def simulate_local_control(terms, t: float, input_state) -> complex:
    """Run the cat-state local-control circuit and return ``<X_1'> + i<Y_1'>``.

    One ancilla is attached per term; qubits are ordered ancillas first, then
    data qubits. The circuit is: Hadamard on ancilla 0, CNOT fan-out from
    ancilla 0 to the others, ``exp(i t H'/2)`` with
    ``H' = sum_i alpha_i Z_{i'} (x) P_i``, the inverse fan-out, and a readout
    of ancilla 0. The result equals ``<psi| exp(-i t H) |psi> = g(-t)``.

    ``input_state`` is a data-register state vector, or a density matrix,
    which is handled by averaging pure-state runs over its eigenbasis.
    """
    terms = [(float(a), p.upper()) for a, p in terms]
    if not terms:
        raise ValidationError("need at least one term")
    n_data = len(terms[0][1])
    if any(len(p) != n_data for _, p in terms):
        raise ValidationError("Pauli strings differ in length")
    n_anc = len(terms)
    n = n_anc + n_data
    if n > MAX_SIM_QUBITS:
        raise ValidationError(f"{n} qubits exceeds simulator cap {MAX_SIM_QUBITS}")

    state = np.asarray(input_state, dtype=complex)
    if state.ndim == 2:
        probs, vecs = np.linalg.eigh(state)
        return sum(
            p * simulate_local_control(terms, t, vecs[:, k])
            for k, p in enumerate(probs)
            if p > 1e-15
        )
    if state.shape != (2**n_data,):
        raise ValidationError("input state has the wrong dimension")
    state = state / np.linalg.norm(state)

    h_aug = sum(
        a * np.kron(_embed({k: _PAULI["Z"]}, n_anc), pauli_matrix(p))
        for k, (a, p) in enumerate(terms)
    )
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    fanout = np.eye(2**n, dtype=complex)
    for k in range(1, n_anc):
        fanout = _cnot(0, k, n) @ fanout

    psi = np.kron(np.eye(2**n_anc, dtype=complex)[0], state)
    psi = _embed({0: hadamard}, n) @ psi
    psi = fanout @ psi
    psi = expm(0.5j * t * h_aug) @ psi
    psi = fanout.conj().T @ psi

    x = np.vdot(psi, _embed({0: _PAULI["X"]}, n) @ psi).real
    y = np.vdot(psi, _embed({0: _PAULI["Y"]}, n) @ psi).real
    return complex(x, y)
