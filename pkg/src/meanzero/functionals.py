"""K-functional, the sharp bounds, their envelopes, and the integral of phi(|J(f)|)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DOMAIN_SLACK,
    Bounds,
    MonotoneWeight,
    PiecewiseLinear,
    StepFunction,
    compensated_sum,
    primitive,
)
from .quadrature import adaptive_gauss

LEMMA_TOL = 1e-10


@dataclass(frozen=True)
class KQuery:
    weight: MonotoneWeight
    t: float

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError(f"K-functional needs t > 0, got {self.t!r}")
        if self.t > self.weight.T * (1 + DOMAIN_SLACK):
            raise ValueError(f"t={self.t!r} lies beyond the weight domain T={self.weight.T!r}")


# ---------------------------------------------------------------------------
# Averages of a weight over an interval
# ---------------------------------------------------------------------------


def _power_mean(p: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = (v ** (p + 1) - u ** (p + 1)) / ((p + 1) * (v - u))
        r = (v - u) / u
        close = u**p * np.expm1((p + 1) * np.log1p(r)) / ((p + 1) * r)
        out = np.where(u <= 0.5 * v, direct, close)
        return np.where(v == u, u**p, out)


def _log_mean(eps: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    U = eps + u
    V = eps + v
    with np.errstate(divide="ignore", invalid="ignore"):
        ulogu = np.where(U > 0, U * np.log(np.where(U > 0, U, 1.0)), 0.0)
        direct = (V * np.log(V) - ulogu) / (V - U) - 1.0
        r = (V - U) / U
        close = np.log(U) + (1.0 + r) * np.log1p(r) / r - 1.0
        out = np.where(U <= 0.5 * V, direct, close)
        return np.where(V == U, np.log(U), out)


def _table_mean(phi: MonotoneWeight, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    xs, ys = phi.knots, phi.knot_values
    cum = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(xs) * (ys[:-1] + ys[1:]))))
    last = xs.size - 2
    ku = np.clip(np.searchsorted(xs, u, side="right") - 1, 0, last)
    kv = np.clip(np.searchsorted(xs, v, side="right") - 1, 0, last)
    fu = np.interp(u, xs, ys)
    fv = np.interp(v, xs, ys)
    head = (xs[ku + 1] - u) * 0.5 * (fu + ys[ku + 1])
    middle = cum[kv] - cum[ku + 1]
    tail = (v - xs[kv]) * 0.5 * (ys[kv] + fv)
    with np.errstate(divide="ignore", invalid="ignore"):
        split = (head + middle + tail) / (v - u)
    same = np.interp(0.5 * (u + v), xs, ys)
    return np.where(ku == kv, same, split)


def weight_mean(phi: MonotoneWeight, u, v) -> np.ndarray:
    """Average of ``phi`` over ``[u, v]`` (``u <= v``), equal to ``phi(u)`` when ``u == v``.

    Closed forms are arranged to avoid cancellation when ``v - u`` is tiny.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    phi._check_domain(v)
    if phi.kind == "power":
        return _power_mean(phi.param, u, v)
    if phi.kind == "shifted_log":
        return _log_mean(phi.param, u, v)
    if phi.kind == "table":
        return _table_mean(phi, np.minimum(u, phi.T), np.minimum(v, phi.T))
    raise ValueError("custom weights have no closed-form average; use quadrature")


def k_functional(phi: MonotoneWeight, t: float) -> float:
    """Average ``(1/t) * int_0^t phi``."""
    q = KQuery(phi, float(t))
    t = min(q.t, phi.T)
    if phi.kind == "power":
        return t**phi.param / (phi.param + 1)
    if phi.kind == "shifted_log" and phi.param == 0.0:
        return math.log(t) - 1.0
    if phi.has_closed_form:
        return float(weight_mean(phi, 0.0, t))
    return adaptive_gauss(phi, 0.0, t) / t


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def theorem1_bound(b: Bounds, phi: MonotoneWeight) -> float:
    """Sharp upper bound on ``int_0^1 phi(|J(f)|)``: the K-functional at the peak height."""
    if phi.T * (1 + DOMAIN_SLACK) < b.peak:
        raise ValueError(
            f"weight domain T={phi.T!r} is smaller than the peak height {b.peak!r}; "
            "construct the weight on [0, peak]"
        )
    return k_functional(phi, b.peak)


def corollary1_bound(b: Bounds, p: float) -> float:
    """Sharp bound on the L^p norm of the primitive."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    return b.peak / (p + 1) ** (1.0 / p)


def corollary2_bound(b: Bounds) -> float:
    """Sharp bound on the geometric mean ``exp(int log|J(f)|)``."""
    return b.peak / math.e


def proposition1_bound(b: Bounds) -> float:
    return b.peak


def thong_bound(b: Bounds) -> float:
    """Earlier bound on ``int |J(f)|``: half the peak height."""
    return 0.5 * b.peak


def kouba_bound(b: Bounds) -> float:
    """Earlier sharp bound on the L^2 norm of the primitive."""
    return b.peak / math.sqrt(3.0)


def perfetti_bound(b: Bounds) -> float:
    """Earlier (non-sharp) bound on ``int J(f)^2``."""
    m, M = b.m, b.M
    return -m * M / (6 * (M - m) ** 2) * (3 * M**2 - 8 * m * M + 3 * m**2)


def envelope_pos(b: Bounds) -> PiecewiseLinear:
    """``x -> min(M x, -m (1 - x))``: the largest value ``J(f)(x)`` can take."""
    return PiecewiseLinear([0.0, b.c0, 1.0], [0.0, b.peak, 0.0])


def envelope_neg(b: Bounds) -> PiecewiseLinear:
    """``x -> min(-m x, M (1 - x))``: the largest value ``-J(f)(x)`` can take."""
    return PiecewiseLinear([0.0, b.c1, 1.0], [0.0, b.peak, 0.0])


def envelope_pos_values(b: Bounds, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.minimum(b.M * x, -b.m * (1.0 - x))


def envelope_neg_values(b: Bounds, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.minimum(-b.m * x, b.M * (1.0 - x))


# ---------------------------------------------------------------------------
# int_0^1 phi(|J(f)(x)|) dx
# ---------------------------------------------------------------------------


def segment_integrals(widths, a, b, phi: MonotoneWeight) -> np.ndarray:
    """Closed-form ``int phi(|J|)`` over each linear segment of ``J``.

    ``a``/``b`` are ``J`` at the segment ends. Segments where ``J`` changes
    sign are split at the zero, and each half contributes its width times
    the K-functional at its nonzero end.
    """
    widths = np.asarray(widths, dtype=float)
    ua = np.abs(a)
    ub = np.abs(b)
    lo = np.minimum(ua, ub)
    hi = np.maximum(ua, ub)
    cross = (np.asarray(a) * np.asarray(b)) < 0
    same = widths * weight_mean(phi, lo, hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = ua / (ua + ub)
        split = widths * frac * weight_mean(phi, 0.0, ua) + widths * (1 - frac) * weight_mean(phi, 0.0, ub)
    return np.where(cross, split, same)


def lhs_from_nodes(nodes, J, phi: MonotoneWeight) -> np.ndarray | float:
    """Closed-form LHS for primitives given by node values; ``J`` may be a batch (rows)."""
    J = np.asarray(J, dtype=float)
    _check_weight_covers(phi, np.max(np.abs(J)))
    w = np.diff(np.asarray(nodes, dtype=float))
    seg = segment_integrals(w, J[..., :-1], J[..., 1:], phi)
    neg_inf = np.any(np.isneginf(seg), axis=-1)
    seg = np.where(np.isneginf(seg), 0.0, seg)
    total = compensated_sum(seg)
    return np.where(neg_inf, -np.inf, total) if np.ndim(total) else (-math.inf if neg_inf else total)


def _check_weight_covers(phi: MonotoneWeight, peak: float) -> None:
    if math.isfinite(phi.T) and peak > phi.T * (1 + DOMAIN_SLACK):
        raise ValueError(f"max |J| = {peak!r} exceeds the weight domain T={phi.T!r}")


def _sign_constant_pieces(J: PiecewiseLinear):
    """Yield ``(width, |J| at start, |J| at end)`` for pieces where J keeps its sign."""
    x, y = J.nodes, J.node_values
    for k in range(x.size - 1):
        w = x[k + 1] - x[k]
        a, b = y[k], y[k + 1]
        if a * b < 0:
            t = abs(a) / (abs(a) + abs(b))
            yield w * t, abs(a), 0.0
            yield w * (1 - t), 0.0, abs(b)
        else:
            yield w, abs(a), abs(b)


def lhs_quadrature(J: PiecewiseLinear, phi: MonotoneWeight) -> float:
    """Generic path: adaptive Gauss-Legendre on every sign-constant linear piece."""
    if phi.kind == "shifted_log" and phi.param == 0.0:
        raise ValueError("quadrature refuses log:0 (singular at zeros of J); use the closed form")
    _check_weight_covers(phi, J.max_abs())
    parts = []
    for w, s0, s1 in _sign_constant_pieces(J):
        if w == 0.0:
            continue
        slope = (s1 - s0) / w
        parts.append(adaptive_gauss(lambda x, s0=s0, slope=slope: phi(s0 + slope * x), 0.0, w))
    return compensated_sum(np.array(parts)) if parts else 0.0


def lhs_integral(f: StepFunction, phi: MonotoneWeight, method: str = "auto") -> float:
    """``int_0^1 phi(|J(f)(x)|) dx``.

    ``method`` is ``"closed"`` (power, log and table weights), ``"quadrature"``
    (any weight except ``log:0``) or ``"auto"``. Returns ``-inf`` for ``log:0``
    when ``J`` vanishes on a whole cell.
    """
    J = primitive(f)
    if method == "auto":
        method = "closed" if phi.has_closed_form else "quadrature"
    if method == "closed":
        return float(lhs_from_nodes(J.nodes, J.node_values, phi))
    if method == "quadrature":
        return lhs_quadrature(J, phi)
    raise ValueError(f"unknown method {method!r}")


def lp_norm_of_primitive(f: StepFunction, p: float) -> float:
    return lhs_integral(f, MonotoneWeight.power(p)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Monotonicity of t -> K(phi, t)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaReport:
    T: float
    grid: int
    t: tuple
    k_values: tuple
    max_violation: float
    violations: int
    plateau: bool
    constant: bool

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def note(self) -> str:
        if self.constant:
            return "constant plateau"
        if self.plateau:
            return "non-strict steps at float resolution"
        return "strictly increasing on grid"


def lemma1_monotonicity_check(phi: MonotoneWeight, T: float, grid: int = 100,
                              tol: float = LEMMA_TOL) -> LemmaReport:
    """Evaluate ``K(phi, iT/grid)`` and report any decrease larger than ``tol``.

    Ties are flagged, never failed: strictness cannot be certified in floats.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    if not (T > 0 and T <= phi.T):
        raise ValueError(f"need 0 < T <= weight domain ({phi.T!r}), got {T!r}")
    ts = T * np.arange(1, grid + 1) / grid
    ks = np.array([k_functional(phi, t) for t in ts])
    running_max = np.maximum.accumulate(ks)
    drops = running_max[:-1] - ks[1:]
    max_violation = float(max(drops.max(), 0.0))
    violations = int(np.count_nonzero(drops > tol))
    plateau = bool(np.any(drops >= 0))
    return LemmaReport(
        T=float(T),
        grid=grid,
        t=tuple(ts.tolist()),
        k_values=tuple(ks.tolist()),
        max_violation=max_violation,
        violations=violations,
        plateau=plateau,
        constant=phi.is_constant_on(T),
    )
