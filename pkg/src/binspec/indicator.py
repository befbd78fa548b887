"""Bin indicator functions, their Fourier coefficients and truncation times.

Two bin shapes are supported, both supported on ``[-eta, eta]`` and
satisfying ``f(w) + f(w - eta) = 1`` on ``[0, eta]``:

``cos2``
    ``cos(pi w / (2 eta))**2`` with closed-form Fourier coefficients.
``somma``
    a width-``eta`` box convolved with the normalized bump
    ``h(w) = a exp(-1 / (1 - (c w)**2))``, ``c = 2/eta``; values and
    coefficients by adaptive quadrature.

Fourier coefficients follow ``F_t = (1/2pi) int f(w) exp(-i t w) dw``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from binspec.errors import NumericalError, ValidationError

KINDS = ("cos2", "somma")

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


@dataclass(frozen=True)
class IndicatorFunction:
    kind: str
    eta: float
    somma_norm: float | None = None
    somma_scale: float | None = None
    somma_alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown indicator kind {self.kind!r}")
        if not 0 < self.eta <= 1:
            raise ValidationError(f"bin width {self.eta!r} outside (0, 1]")

    @classmethod
    def cos2(cls, eta: float) -> "IndicatorFunction":
        return cls("cos2", float(eta))

    @classmethod
    def somma(cls, eta: float, alpha: float | None = None) -> "IndicatorFunction":
        a, c = normalize_somma(eta)
        return cls("somma", float(eta), a, c, alpha)

    @classmethod
    def make(cls, kind: str, eta: float) -> "IndicatorFunction":
        return cls.somma(eta) if kind == "somma" else cls(kind, float(eta))


# ---------------------------------------------------------------------------
# bump kernel


def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out if out.ndim else float(out)


def _quad(func, a, b, **kw):
    opts = {**_QUAD_OPTS, **kw}
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(func, a, b, **opts)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature did not converge: {exc}") from exc
    return val


@lru_cache(maxsize=1)
def bump_mass() -> float:
    """``int_{-1}^{1} exp(-1/(1-x^2)) dx`` (about 0.443994)."""
    return 2.0 * _quad(_bump, 0.0, 1.0)


def _bump_cdf(y: float) -> float:
    """Unnormalized ``int_{-1}^{y}`` of the unit bump."""
    if y <= -1:
        return 0.0
    if y >= 1:
        return bump_mass()
    if y <= 0:
        return _quad(_bump, -1.0, y)
    return bump_mass() - _quad(_bump, y, 1.0)


@lru_cache(maxsize=4096)
def _bump_cosine_transform(s: float) -> float:
    """``int_{-1}^{1} exp(-1/(1-x^2)) cos(s x) dx``."""
    if s == 0:
        return bump_mass()
    return 2.0 * _quad(_bump, 0.0, 1.0, weight="cos", wvar=s)


def normalize_somma(eta: float) -> tuple[float, float]:
    """Return ``(a, c)`` such that ``a exp(-1/(1-(c w)^2))`` has unit mass
    on its support ``[-eta/2, eta/2]``."""
    if not eta > 0:
        raise ValidationError("eta must be positive")
    c = 2.0 / eta
    # int h = a/c * bump_mass
    a = c / bump_mass()
    return a, c


# ---------------------------------------------------------------------------
# pointwise values


def value(ind: IndicatorFunction, w):
    """Indicator value(s) at ``w``; scalar in, scalar out."""
    w_arr = np.asarray(w, dtype=float)
    eta = ind.eta
    if ind.kind == "cos2":
        out = np.where(np.abs(w_arr) < eta, np.cos(np.pi * w_arr / (2 * eta)) ** 2, 0.0)
    else:
        c, m = ind.somma_scale, bump_mass()

        def one(x):
            if abs(x) >= eta:
                return 0.0
            return (_bump_cdf(c * (x + eta / 2)) - _bump_cdf(c * (x - eta / 2))) / m

        out = np.vectorize(one, otypes=[float])(w_arr)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Fourier coefficients


def _cos2_coeff(eta: float, t):
    # pi*eta*sin(x) / (2x(pi^2 - x^2)) with x = |t| eta. Near x = pi it is
    # rewritten through d = pi - x so the removable singularity is exact;
    # below pi/2 sin(x)/x is used directly (sin(pi - x) loses x when small).
    x = np.abs(np.asarray(t, dtype=float)) * eta
    d = np.pi - x
    with np.errstate(divide="ignore", invalid="ignore"):
        near_pi = np.pi * eta * np.sinc(d / np.pi) / (2 * x * (np.pi + x))
        small = np.pi * eta * np.sinc(x / np.pi) / (2 * d * (np.pi + x))
    return np.where(x < np.pi / 2, small, near_pi)


def _somma_coeff(eta: float, t):
    t_arr = np.abs(np.asarray(t, dtype=float))
    s = t_arr * eta / 2
    phi = np.vectorize(_bump_cosine_transform, otypes=[float])(s)
    return eta / (2 * np.pi) * np.sinc(s / np.pi) * phi / bump_mass()


def fourier_coeff(ind: IndicatorFunction, t):
    """Real Fourier coefficient(s) ``F_t``; even in ``t``."""
    f = _cos2_coeff if ind.kind == "cos2" else _somma_coeff
    out = f(ind.eta, t)
    return float(out) if np.ndim(out) == 0 else out


def fourier_coeffs(ind: IndicatorFunction, T: int) -> np.ndarray:
    """``F_t`` for ``t = -T..T`` (length ``2T+1``)."""
    half = np.asarray(fourier_coeff(ind, np.arange(T + 1)), dtype=float).reshape(-1)
    return np.concatenate([half[:0:-1], half])


def coefficient_table_csv(ind: IndicatorFunction, T: int, path) -> None:
    ts = np.arange(-T, T + 1)
    F = fourier_coeffs(ind, T)
    with open(path, "w") as fh:
        fh.write("t,F_t\n")
        for t, v in zip(ts.tolist(), F.tolist()):
            fh.write(f"{t},{v!r}\n")


# ---------------------------------------------------------------------------
# decay of the bump coefficients


def decay_bound_somma(eta: float, t, alpha: float | None = None):
    """``eta * exp(-sqrt(|t| eta / 2))``.

    Only certified for ``|t| >= alpha/eta``; pass ``alpha`` to have that
    checked.
    """
    t_arr = np.abs(np.asarray(t, dtype=float))
    if alpha is not None and np.any(t_arr < alpha / eta):
        raise ValidationError(f"decay bound not certified below |t| = alpha/eta = {alpha / eta:g}")
    out = eta * np.exp(-np.sqrt(t_arr * eta / 2))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    eta: float
    t_min: int
    t_max: int


def estimate_alpha(
    eta: float,
    search_horizon: float = 20.0,
    grid_ratio: float = 2 ** 0.25,
) -> AlphaEstimate:
    """Smallest ``alpha >= 1`` on a geometric grid for which the bump decay
    bound holds at every integer ``t`` in ``[alpha/eta, search_horizon/eta]``.

    The check uses quadrature coefficients, so the result is only as good as
    the verified range ``[t_min, t_max]`` it reports.
    """
    if not eta > 0:
        raise ValidationError("eta must be positive")
    t_lo = math.ceil(1.0 / eta)
    t_hi = math.floor(search_horizon / eta)
    if t_hi < t_lo:
        raise ValidationError("search horizon below 1/eta")
    ts = np.arange(t_lo, t_hi + 1)
    F = np.abs(_somma_coeff(eta, ts))
    bad = ts[F > decay_bound_somma(eta, ts)]
    alpha = 1.0
    while alpha <= search_horizon:
        if bad.size == 0 or math.ceil(alpha / eta) > bad.max():
            t_min = math.ceil(alpha / eta)
            if t_min > t_hi:
                break
            return AlphaEstimate(alpha, eta, t_min, t_hi)
        alpha *= grid_ratio
    raise NumericalError(f"no decay constant alpha <= {search_horizon} found for eta={eta}")


# ---------------------------------------------------------------------------
# product logarithm


_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17


def _branch_offset(r: float, tol: float, max_iter: int) -> float:
    """Negative ``u`` with ``(u - 1) e^u + 1 = r`` for small ``r > 0``.

    With ``w = u - 1`` this is ``w e^w = -1/e + r/e``. The left side is summed
    as ``sum_k (k-1) u^k / k!``, which has no cancellation near ``u = 0``,
    where the direct form of the equation is too flat to resolve ``w``.
    """
    def lhs(u):
        term, total = u, 0.0
        for k in range(2, 40):
            term *= u / k  # u^k / k!
            total += (k - 1) * term
        return total

    p = -math.sqrt(2.0 * r)
    u = p - p * p / 3.0 + 11.0 / 72.0 * p**3
    for _ in range(max_iter):
        step = (lhs(u) - r) / (u * math.exp(u))
        u -= step
        if abs(step) <= tol * abs(u):
            break
    return u


def product_log_branch_m1(y: float, tol: float = 1e-15, max_iter: int = 200) -> float:
    """Lower real branch ``W_{-1}(y)``: the solution ``w <= -1`` of
    ``w e^w = y`` for ``y`` in ``[-1/e, 0)``.

    Newton on ``w + log(-w) = log(-y)`` inside a maintained bracket, with
    bisection whenever a Newton step leaves it. Within about ``0.017`` of
    ``-1/e`` the offset ``w + 1`` is solved for instead.
    """
    y = float(y)
    branch = -math.exp(-1.0)
    if not (branch - 1e-15 <= y < 0):
        raise ValidationError(f"W_-1 is real only on [-1/e, 0); got {y!r}")
    # distance above the branch point, with 1/e in double-double
    delta = (y + _INV_E_HI) + _INV_E_LO
    if delta <= 0:
        return -1.0
    if math.e * delta < 0.045:
        return -1.0 + _branch_offset(math.e * delta, tol, max_iter)

    target = math.log(-y)

    def g(w):
        return w + math.log(-w) - target

    # g increases on (-inf, -1], from -inf up to g(-1) > 0
    hi = -1.0
    L1 = math.log(-y)
    w = min(L1 - math.log(-L1), -1.0)
    lo = w
    while g(lo) > 0:
        lo = 2.0 * lo - 1.0
    if g(w) > 0:
        w = lo
    for _ in range(max_iter):
        gw = g(w)
        if gw > 0:
            hi = w
        else:
            lo = w
        step = gw / (1.0 + 1.0 / w)
        w_new = w - step
        if not lo < w_new < hi:
            w_new = 0.5 * (lo + hi)
        if abs(w_new - w) <= tol * abs(w_new):
            w = w_new
            break
        w = w_new
    return w


# ---------------------------------------------------------------------------
# truncation times


def min_time_somma(eta: float, epsilon: float) -> float:
    """Truncation time for the bump indicator:
    ``(2/eta) (1 + W_{-1}(-eps eta / (32 e)))^2``.

    This solves ``exp(-s)(1 + s) = eps eta / 32`` for ``s = sqrt(T eta/2)``;
    callers must additionally enforce ``T >= alpha/eta``.
    """
    if not (eta > 0 and epsilon > 0):
        raise ValidationError("eta and epsilon must be positive")
    y = -epsilon * eta / (32 * math.e)
    if not -math.exp(-1.0) < y < 0:
        raise ValidationError(f"eps*eta/(32e) = {-y!r} outside (0, 1/e)")
    w = product_log_branch_m1(y)
    return float(2.0 / eta * (1.0 + w) ** 2)


def min_time_cos2(eta: float, epsilon: float) -> float:
    """Truncation time for the cos^2 indicator:
    ``(pi/eta) exp(pi eta eps / 2) / sqrt(exp(pi eta eps) - 1)``."""
    if not (eta > 0 and epsilon > 0):
        raise ValidationError("eta and epsilon must be positive")
    x = math.pi * eta * epsilon
    return float(math.pi / eta * math.exp(x / 2) / math.sqrt(math.expm1(x)))


def min_time(kind: str, eta: float, epsilon: float) -> float:
    if kind == "cos2":
        return min_time_cos2(eta, epsilon)
    if kind == "somma":
        return min_time_somma(eta, epsilon)
    raise ValidationError(f"unknown indicator kind {kind!r}")


def n_bins(eta: float) -> int:
    """``M + 1`` with ``M = floor(1/eta)``, robust to ``1/eta`` landing an
    ulp below an integer."""
    return int(math.floor(1.0 / eta + 1e-9)) + 1


# ---------------------------------------------------------------------------
# cos^2 tail certification


def cos2_tail_remainder(eta: float, t_from: float) -> float:
    """Analytic bound on ``sum_{t > t_from} |F_t|`` for cos^2 (one side),
    valid for ``t_from > pi/eta``."""
    a = (eta * t_from) ** 2
    if a <= np.pi**2:
        raise ValidationError("remainder only valid beyond t = pi/eta")
    return math.log(a / (a - np.pi**2)) / (4 * np.pi)


def cos2_tail(eta: float, T: int, n_exact: int = 10**6) -> float:
    """Two-sided ``sum_{|t| > T} |F_t|``: exact terms up to ``T + n_exact``,
    analytic remainder beyond."""
    t_end = T + n_exact
    ts = np.arange(T + 1, t_end + 1)
    head = float(np.abs(_cos2_coeff(eta, ts)).sum())
    return 2.0 * (head + cos2_tail_remainder(eta, t_end))


def numeric_time_cos2(eta: float, epsilon: float, n_coeffs: int | None = None) -> int:
    """Smallest integer ``T`` whose two-sided cos^2 tail is at most
    ``eps / (2(M+1))``.

    Coefficients up to ``n_coeffs`` are summed exactly and the analytic
    remainder covers the rest. ``None`` sums out to ``ceil(T_cos2) + 10**6``.
    If no ``T <= n_coeffs`` qualifies, the search continues on the remainder
    alone.
    """
    target = epsilon / (2 * n_bins(eta))
    if n_coeffs is None:
        n_coeffs = math.ceil(min_time_cos2(eta, epsilon)) + 10**6
    ts = np.arange(1, n_coeffs + 1)
    F = np.abs(_cos2_coeff(eta, ts))
    rem = cos2_tail_remainder(eta, n_coeffs)
    # tail[k] = sum_{t > k} |F_t| for k = 0..n_coeffs
    tail = np.concatenate([np.cumsum(F[::-1])[::-1], [0.0]]) + rem
    ok = np.nonzero(2.0 * tail <= target)[0]
    if ok.size:
        return int(ok[0])
    T = n_coeffs
    while 2.0 * cos2_tail_remainder(eta, T) > target:
        T *= 2
    lo, hi = n_coeffs, T
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if 2.0 * cos2_tail_remainder(eta, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi
