"""Run-time model for binned phase estimation on an L x L Fermi-Hubbard lattice.

Costs are in sub-circuit units: total switched-on two-qubit interaction
time, normalized to unit interaction strength. A Trotter step of size
``delta`` costs one on-site layer plus four hopping layers,
``g3(u delta) + 4 g4(v delta)``, where

* sub-circuit synthesis: ``g3(x) = |x|/2 + 2 sqrt(2|x|)``,
  ``g4(x) = 12 (2|x|)^(1/3)``;
* standard (CNOT-based) synthesis: ``g3 = 5pi/4``, ``g4 = 5pi/2``.

Model choices that are not fixed by the underlying analysis, all exposed on
:class:`CostScenario`:

* Trotter error ``W_p T delta^p`` with ``W_p = 1`` by default.
* A p-th order step costs ``stages[p]`` first-order layer sweeps
  (1, 2, 10 for p = 1, 2, 4).
* With ``fallback_to_standard`` a sub-circuit gate never costs more than its
  standard decomposition, since a compiler can always choose the latter.
* The Trotter error budget is ``trotter_split * epsilon``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from binspec import indicator as ind_mod
from binspec.errors import NoBinsAchievable, NumericalError, ValidationError
from binspec.rqeep import inverse_params

STANDARD_G3 = 5 * math.pi / 4
STANDARD_G4 = 5 * math.pi / 2
TROTTER_ORDERS = (1, 2, 4)
DEFAULT_STAGES = {1: 1, 2: 2, 4: 10}

SWEEP_HEADER = [
    "L", "epsilon", "synthesis", "indicator", "q_noise", "trotter_order",
    "runtime_budget", "eta_min", "m", "delta_over_dim",
]


@dataclass
class CostScenario:
    L: int = 3
    u: float = 1.0
    v: float = 1.0
    Lambda: float | None = None
    synthesis: str = "subcircuit"
    trotter_order: int = 1
    trotter_constants: dict = field(default_factory=lambda: {1: 1.0, 2: 1.0, 4: 1.0})
    stages: dict = field(default_factory=lambda: dict(DEFAULT_STAGES))
    indicator_kind: str = "cos2"
    epsilon: float = 0.1
    q_noise: float = 1e-6
    epsilon_tar: float | None = None
    trotter_split: float = 1.0
    extra_qubits: int = 0
    fallback_to_standard: bool = True

    def __post_init__(self):
        self.trotter_constants = {int(k): float(v) for k, v in self.trotter_constants.items()}
        self.stages = {int(k): int(v) for k, v in self.stages.items()}
        if self.synthesis not in ("subcircuit", "standard"):
            raise ValidationError(f"unknown synthesis {self.synthesis!r}")
        if self.trotter_order not in TROTTER_ORDERS:
            raise ValidationError(f"trotter order must be one of {TROTTER_ORDERS}")
        if self.indicator_kind not in ind_mod.KINDS:
            raise ValidationError(f"unknown indicator kind {self.indicator_kind!r}")
        if self.L < 1:
            raise ValidationError("L must be >= 1")
        for name in ("u", "v", "epsilon", "trotter_split"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValidationError(f"{name} must be finite and non-negative")
        if not 0 <= self.q_noise <= 1:
            raise ValidationError("q_noise must lie in [0, 1]")

    @property
    def fermions(self) -> float:
        return float(self.L**2) if self.Lambda is None else float(self.Lambda)

    @property
    def target_error(self) -> float:
        return self.epsilon if self.epsilon_tar is None else self.epsilon_tar

    @property
    def qubits(self) -> int:
        return qubit_count(self.L) + self.extra_qubits

    def replace(self, **kw) -> "CostScenario":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["trotter_constants"] = {str(k): v for k, v in self.trotter_constants.items()}
        d["stages"] = {str(k): v for k, v in self.stages.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CostScenario":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "CostScenario":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass
class CostBreakdown:
    T: float
    delta: float
    steps: int
    step_cost: float
    total_runtime: float
    trotter_error: float
    combined_error: float
    qubit_count: int
    trotter_order: int


# ---------------------------------------------------------------------------
# gate and step costs


def gate_cost(synthesis: str, term: str, coupling: float, delta: float) -> float:
    """Run-time of one on-site (3-local) or hopping (4-local) rotation."""
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    if term not in ("onsite", "hopping"):
        raise ValidationError(f"unknown term {term!r}")
    if synthesis == "standard":
        return STANDARD_G3 if term == "onsite" else STANDARD_G4
    if synthesis != "subcircuit":
        raise ValidationError(f"unknown synthesis {synthesis!r}")
    x = abs(coupling * delta)
    if term == "onsite":
        return x / 2 + 2 * math.sqrt(2 * x)
    return 12 * (2 * x) ** (1 / 3)


def k_local_cost_exponent(k: int) -> float:
    """Exponent ``1/(k-1)`` in the ``O(|t|^(1/(k-1)))`` sub-circuit cost of a
    k-local Pauli rotation (the Fermi-Hubbard pipeline uses the explicit
    ``g3``/``g4`` instead)."""
    if k < 2:
        raise ValidationError("k must be >= 2")
    return 1.0 / (k - 1)


def trotter_step_cost(scn: CostScenario, delta: float) -> float:
    g3 = gate_cost(scn.synthesis, "onsite", scn.u, delta)
    g4 = gate_cost(scn.synthesis, "hopping", scn.v, delta)
    if scn.synthesis == "subcircuit" and scn.fallback_to_standard:
        g3, g4 = min(g3, STANDARD_G3), min(g4, STANDARD_G4)
    return scn.stages[scn.trotter_order] * (g3 + 4 * g4)


def trotter_error(scn: CostScenario, T: float, delta: float) -> float:
    p = scn.trotter_order
    return scn.trotter_constants[p] * T * delta**p


def _saturating_delta(scn: CostScenario, T: float, budget: float) -> float:
    p = scn.trotter_order
    return (budget / (scn.trotter_constants[p] * T)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# noise


def qubit_count(L: int) -> int:
    """Qubits for the compact encoding plus local control ancillas."""
    return 2 * (L**2 + (L - 1) ** 2 + 2 * (L - 1))


def noise_runtime_budget(Q_total: int, q_noise: float, epsilon_tar: float) -> float:
    """Largest run-time with ``1 - (1-q)^(Q T) <= eps_tar``."""
    if not 0 <= q_noise < 1:
        raise ValidationError("q_noise must lie in [0, 1)")
    if not 0 < epsilon_tar < 1:
        raise ValidationError("epsilon_tar must lie in (0, 1)")
    if q_noise == 0:
        return math.inf
    return math.log1p(-epsilon_tar) / (Q_total * math.log1p(-q_noise))


def noise_threshold(Q_total: int, runtime: float, epsilon_tar: float) -> float:
    """Largest noise rate whose run-time budget still covers ``runtime``."""
    return -math.expm1(math.log1p(-epsilon_tar) / (Q_total * runtime))


# ---------------------------------------------------------------------------
# total cost and the achievable bin width


def evolution_time(indicator_kind: str, eta: float, epsilon: float, Lambda: float) -> float:
    """Physical evolution time: the truncation time divided by ``10 Lambda``."""
    return ind_mod.min_time(indicator_kind, eta, epsilon) / (10.0 * Lambda)


def total_cost(scn: CostScenario, eta: float) -> CostBreakdown:
    """Run-time of the longest controlled evolution for bin width ``eta``.

    The step size saturates the Trotter budget, the step count is rounded up
    and the steps are then shortened to ``T/steps``.
    """
    if not 0 < eta <= 1:
        raise ValidationError("eta must lie in (0, 1]")
    budget = scn.trotter_split * scn.epsilon
    if not budget > 0:
        raise NumericalError("no feasible Trotter step: error budget is not positive")
    T = evolution_time(scn.indicator_kind, eta, scn.epsilon, scn.fermions)
    delta_max = _saturating_delta(scn, T, budget)
    steps = max(1, math.ceil(T / delta_max))
    delta = T / steps
    step_cost = trotter_step_cost(scn, delta)
    eps_t = trotter_error(scn, T, delta)
    return CostBreakdown(
        T=T,
        delta=delta,
        steps=steps,
        step_cost=step_cost,
        total_runtime=steps * step_cost,
        trotter_error=eps_t,
        combined_error=math.hypot(scn.epsilon, eps_t),
        qubit_count=scn.qubits,
        trotter_order=scn.trotter_order,
    )


@dataclass
class EtaSolution:
    eta_min: float | None
    trotter_order: int | None
    breakdown: CostBreakdown | None

    @property
    def feasible(self) -> bool:
        return self.eta_min is not None


def _smallest_eta(scn: CostScenario, budget: float, eta_floor: float, rtol: float):
    def runtime(eta):
        return total_cost(scn, eta).total_runtime

    if runtime(1.0) > budget:
        return None
    if runtime(eta_floor) <= budget:
        return eta_floor
    lo, hi = eta_floor, 1.0
    while hi / lo - 1 > rtol:
        mid = math.sqrt(lo * hi)
        if runtime(mid) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def achievable_eta(
    scn: CostScenario,
    runtime_budget: float,
    orders=TROTTER_ORDERS,
    eta_floor: float = 1e-6,
    rtol: float = 1e-4,
) -> EtaSolution:
    """Smallest bin width whose run-time fits the budget, minimized over
    Trotter orders. Infeasible budgets give ``eta_min = None``."""
    if not runtime_budget > 0:
        raise ValidationError("runtime budget must be positive")
    best = EtaSolution(None, None, None)
    for p in orders:
        scn_p = scn.replace(trotter_order=p)
        eta = _smallest_eta(scn_p, runtime_budget, eta_floor, rtol)
        if eta is not None and (best.eta_min is None or eta < best.eta_min):
            best = EtaSolution(eta, p, total_cost(scn_p, eta))
    return best


def min_runtime(scn: CostScenario, eta: float, orders=TROTTER_ORDERS) -> tuple[float, int]:
    """Cheapest run-time over Trotter orders at fixed ``eta``."""
    costs = [(total_cost(scn.replace(trotter_order=p), eta).total_runtime, p) for p in orders]
    return min(costs)


def threshold_noise(scn: CostScenario, eta: float, orders=TROTTER_ORDERS) -> float:
    """Largest depolarizing rate at which bin width ``eta`` is achievable."""
    runtime, _ = min_runtime(scn, eta, orders)
    return noise_threshold(scn.qubits, runtime, scn.target_error)


# ---------------------------------------------------------------------------
# sweep


def _sweep_cell(args):
    base, L, eps, syn, kind, q = args
    scn = base.replace(L=L, epsilon=eps, synthesis=syn, indicator_kind=kind, q_noise=q)
    budget = noise_runtime_budget(scn.qubits, q, scn.target_error)
    sol = achievable_eta(scn, budget)
    m = ""
    if sol.feasible:
        try:
            m = inverse_params(sol.eta_min, eps, 1)[0]
        except NoBinsAchievable:
            m = ""
    return [
        L, eps, syn, kind, q,
        "" if sol.trotter_order is None else sol.trotter_order,
        budget,
        "" if sol.eta_min is None else sol.eta_min,
        m,
        16.0 * eps,
    ]


def figure_sweep(
    L_values=(3, 5, 10),
    epsilon_values=(0.1, 0.05, 0.01),
    syntheses=("subcircuit", "standard"),
    indicators=("cos2", "somma"),
    q_values=(1e-5, 1e-6, 1e-7, 1e-8, 1e-9),
    path=None,
    base: CostScenario | None = None,
    parallel: int = 1,
) -> list[list]:
    """Achievable bin width over the Cartesian parameter grid.

    Rows follow the grid order (``L`` outermost, ``q`` innermost) whatever
    the worker count. With ``path`` the rows are written as CSV.
    """
    base = CostScenario() if base is None else base
    cells = [(base, *c) for c in product(L_values, epsilon_values, syntheses, indicators, q_values)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    if path is not None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(SWEEP_HEADER)
            wr.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    return rows
