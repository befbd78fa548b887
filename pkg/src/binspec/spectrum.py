"""Small many-body Hamiltonians, dense diagonalization and spectral rescaling.

Fermionic modes are ordered site-major, spin-minor: mode ``2*site + spin``
for spinful models (spin 0 is up), mode ``site`` for spinless ones. Sites of
an ``lx x ly`` lattice are numbered row-major, ``site = y*lx + x``. Basis
states are occupation bitmasks with bit ``k`` holding mode ``k``; the
Jordan-Wigner string of ``a_k`` runs over all modes with index below ``k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from binspec.errors import NumericalError, ValidationError

DEFAULT_DIM_CAP = 4096
PROMISE_HALF_WIDTH = 0.5

_HERMITIAN_TOL = 1e-12
_WEIGHT_TOL = 1e-12


@dataclass
class HamiltonianMatrix:
    """Dense Hermitian matrix with a free-form label."""

    entries: np.ndarray
    label: str = ""
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValidationError("Hamiltonian must be a square matrix")
        if not 1 <= self.dimension <= self.dim_cap:
            raise ValidationError(
                f"dimension {self.dimension} outside [1, {self.dim_cap}]"
            )
        if not np.allclose(self.entries, self.entries.conj().T, rtol=0, atol=_HERMITIAN_TOL):
            raise ValidationError("Hamiltonian is not Hermitian")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


@dataclass
class Spectrum:
    """Sorted eigenvalues with per-eigenvector weights.

    ``weights[i]`` is the overlap of the input state with eigenvector ``i``.
    The promise window ``[-1/2, 1/2]`` is only enforced by
    :meth:`check_promise`, since freshly diagonalized spectra are raw.
    """

    eigenvalues: np.ndarray
    weights: np.ndarray
    scale_factor: float = 1.0
    source: str = ""

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float).ravel()
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.eigenvalues.size == 0:
            raise ValidationError("spectrum is empty")
        if self.eigenvalues.shape != self.weights.shape:
            raise ValidationError("eigenvalues and weights differ in length")
        if not (np.all(np.isfinite(self.eigenvalues)) and np.all(np.isfinite(self.weights))):
            raise ValidationError("spectrum contains NaN or Inf")
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValidationError("eigenvalues must be non-decreasing")
        if np.any(self.weights < 0):
            raise ValidationError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > _WEIGHT_TOL:
            raise ValidationError(f"weights sum to {self.weights.sum()!r}, not 1")
        if not (math.isfinite(self.scale_factor) and self.scale_factor > 0):
            raise ValidationError("scale_factor must be a positive finite number")

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    def check_promise(self) -> "Spectrum":
        if np.max(np.abs(self.eigenvalues)) > PROMISE_HALF_WIDTH:
            raise ValidationError(
                "eigenvalues leave the promise window [-1/2, 1/2]: "
                f"max |lambda| = {np.max(np.abs(self.eigenvalues))!r}"
            )
        return self

    def maximally_mixed(self) -> "Spectrum":
        """Copy of this spectrum with uniform weights."""
        w = np.full(self.dimension, 1.0 / self.dimension)
        return Spectrum(self.eigenvalues.copy(), w, self.scale_factor, self.source)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "weights": self.weights.tolist(),
            "scale_factor": float(self.scale_factor),
            "source": self.source,
        }


# ---------------------------------------------------------------------------
# Fermi-Hubbard construction


def _lattice_bonds(lx: int, ly: int) -> list[tuple[int, int]]:
    bonds = []
    for y in range(ly):
        for x in range(lx):
            s = y * lx + x
            if x + 1 < lx:
                bonds.append((s, s + 1))
            if y + 1 < ly:
                bonds.append((s, s + lx))
    return bonds


def _sector_basis(n_modes: int, n_particles: int | None) -> np.ndarray:
    if n_particles is None:
        return np.arange(1 << n_modes, dtype=np.int64)
    states = [sum(1 << k for k in occ) for occ in combinations(range(n_modes), n_particles)]
    return np.array(sorted(states), dtype=np.int64)


def _popcount_below(state: int, mode: int) -> int:
    return bin(state & ((1 << mode) - 1)).count("1")


def build_fermi_hubbard(
    L: int,
    u: float,
    v: float,
    spinful: bool = True,
    particle_sector: int | None = None,
    ly: int | None = None,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> HamiltonianMatrix:
    """Fermi-Hubbard Hamiltonian on an open ``L x ly`` square lattice.

    ``H = u sum_i n_{i,up} n_{i,dn} + v sum_{<ij>,s} (a+_{is} a_{js} + h.c.)``.
    ``ly`` defaults to ``L``; ``ly=1`` gives an open chain. The on-site term
    is absent for spinless models. With ``particle_sector`` the matrix is the
    block of fixed total fermion number, in ascending bitmask order.
    """
    ly = L if ly is None else ly
    if L < 1 or ly < 1:
        raise ValidationError("lattice sides must be >= 1")
    n_sites = L * ly
    n_spin = 2 if spinful else 1
    n_modes = n_sites * n_spin
    if particle_sector is not None and not 0 <= particle_sector <= n_modes:
        raise ValidationError(
            f"particle sector {particle_sector} invalid for {n_modes} modes"
        )
    dim = 2**n_modes if particle_sector is None else math.comb(n_modes, particle_sector)
    if dim > dim_cap:
        raise ValidationError(f"Hilbert-space dimension {dim} exceeds cap {dim_cap}")

    basis = _sector_basis(n_modes, particle_sector)
    index = {int(s): i for i, s in enumerate(basis)}
    H = np.zeros((dim, dim))

    hops = []
    for a, b in _lattice_bonds(L, ly):
        for spin in range(n_spin):
            i, j = a * n_spin + spin, b * n_spin + spin
            hops += [(i, j), (j, i)]

    for col, s in enumerate(basis.tolist()):
        if spinful:
            for site in range(n_sites):
                up, dn = 1 << (2 * site), 1 << (2 * site + 1)
                if s & up and s & dn:
                    H[col, col] += u
        for i, j in hops:
            # a+_i a_j |s>
            if not s & (1 << j) or s & (1 << i):
                continue
            sign = _popcount_below(s, j)
            s1 = s ^ (1 << j)
            sign += _popcount_below(s1, i)
            s2 = s1 | (1 << i)
            H[index[s2], col] += v * (-1.0) ** sign

    kind = "spinful" if spinful else "spinless"
    label = f"fermi-hubbard {L}x{ly} {kind} u={u} v={v}"
    if particle_sector is not None:
        label += f" N={particle_sector}"
    return HamiltonianMatrix(H, label=label, dim_cap=dim_cap)


# ---------------------------------------------------------------------------
# Diagonalization and normalization


def diagonalize(h: HamiltonianMatrix, weights_mode="maximally_mixed") -> Spectrum:
    """Dense Hermitian eigendecomposition of ``h``.

    ``weights_mode`` is ``"maximally_mixed"`` or an explicit weight vector
    aligned with the sorted eigenvalues.
    """
    try:
        evals = np.linalg.eigvalsh(h.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if isinstance(weights_mode, str):
        if weights_mode != "maximally_mixed":
            raise ValidationError(f"unknown weights mode {weights_mode!r}")
        weights = np.full(evals.size, 1.0 / evals.size)
    else:
        weights = np.asarray(weights_mode, dtype=float)
    return Spectrum(evals, weights, 1.0, h.label)


def rescale_to_promise(s, bound: float | None = None) -> Spectrum:
    """Divide eigenvalues by a scale factor so they fit in ``[-1/2, 1/2]``.

    With ``bound`` given, the scale factor is ``bound`` itself (for a norm
    bound ``||H|| <= B`` pass ``2B``, e.g. ``10*Lambda`` for Fermi-Hubbard).
    Otherwise the exact ``2 max|lambda|`` is used; an all-zero spectrum gets
    scale factor 1. Accepts a :class:`Spectrum` or raw eigenvalues (which
    then get uniform weights).
    """
    if not isinstance(s, Spectrum):
        evals = np.sort(np.asarray(s, dtype=float).ravel())
        if evals.size == 0:
            raise ValidationError("spectrum is empty")
        s = Spectrum(evals, np.full(evals.size, 1.0 / evals.size))
    if bound is not None:
        if not bound > 0:
            raise ValidationError("bound must be positive")
        scale = float(bound)
    else:
        peak = float(np.max(np.abs(s.eigenvalues)))
        scale = 2.0 * peak if peak > 0 else 1.0
    evals = s.eigenvalues / scale
    if bound is None:
        # max|lambda| / (2 max|lambda|) can land an ulp above 1/2
        evals = np.clip(evals, -PROMISE_HALF_WIDTH, PROMISE_HALF_WIDTH)
    out = Spectrum(evals, s.weights.copy(), s.scale_factor * scale, s.source)
    return out.check_promise()


# ---------------------------------------------------------------------------
# Synthetic spectra


def synthetic_spectrum(
    kind: str,
    dimension: int,
    rng_seed: int,
    gap: tuple[float, float] = (-0.1, 0.1),
    n_clusters: int = 3,
    cluster_width: float = 0.02,
) -> Spectrum:
    """Random spectrum in the promise window with uniform weights.

    ``uniform`` draws eigenvalues uniformly on ``[-1/2, 1/2]``; ``gapped``
    draws uniformly on the window minus the open interval ``gap``;
    ``clustered`` draws Gaussian clusters (clipped to the window) around
    uniformly placed centres.
    """
    if dimension < 1:
        raise ValidationError("dimension must be >= 1")
    rng = np.random.default_rng(rng_seed)
    h = PROMISE_HALF_WIDTH
    if kind == "uniform":
        evals = rng.uniform(-h, h, dimension)
    elif kind == "gapped":
        lo, hi = gap
        if not -h <= lo < hi <= h:
            raise ValidationError(f"gap {gap} not inside [-1/2, 1/2]")
        left, right = lo + h, h - hi
        if left + right <= 0:
            raise ValidationError("gap covers the whole window")
        x = rng.uniform(0.0, left + right, dimension)
        evals = np.where(x < left, x - h, hi + (x - left))
    elif kind == "clustered":
        centres = rng.uniform(-h, h, n_clusters)
        which = rng.integers(0, n_clusters, dimension)
        evals = np.clip(centres[which] + cluster_width * rng.standard_normal(dimension), -h, h)
    else:
        raise ValidationError(f"unknown synthetic kind {kind!r}")
    evals = np.sort(evals)
    return Spectrum(evals, np.full(dimension, 1.0 / dimension), 1.0, f"synthetic {kind} seed={rng_seed}")


# ---------------------------------------------------------------------------
# JSON


def _reject_constant(name):
    raise ValidationError(f"non-finite value {name} in spectrum file")


def spectrum_from_dict(d: dict) -> Spectrum:
    try:
        s = Spectrum(
            d["eigenvalues"],
            d["weights"],
            float(d.get("scale_factor", 1.0)),
            str(d.get("source", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed spectrum: {exc}") from exc
    return s.check_promise()


def save_spectrum(s: Spectrum, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=2, allow_nan=False) + "\n")


def load_spectrum(path) -> Spectrum:
    try:
        d = json.loads(Path(path).read_text(), parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed spectrum file {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ValidationError("spectrum file must hold a JSON object")
    return spectrum_from_dict(d)
