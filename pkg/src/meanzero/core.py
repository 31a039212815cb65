"""Exact representations of bounded mean-zero step functions and their primitives.

Everything downstream goes through four immutable types:

* :class:`Bounds` -- the box ``m < 0 < M`` with its derived constants,
* :class:`StepFunction` -- a piecewise-constant function on ``[0, 1]``,
* :class:`PiecewiseLinear` -- a continuous piecewise-linear function on ``[0, 1]``,
* :class:`MonotoneWeight` -- a nondecreasing weight on ``[0, T]``.

Sums over cells use Neumaier compensation in a fixed left-to-right order so
results are reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

EPS_MEAN = 1e-12
EPS_MONO = 1e-14
# Slack allowed when a weight is evaluated a few ulps past its domain cap.
DOMAIN_SLACK = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def compensated_sum(x, axis: int = -1) -> np.ndarray | float:
    """Neumaier sum along ``axis``, accumulated strictly left to right.

    Works row-wise on stacked inputs, so a batch of functions and a single
    function get bitwise identical sums.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    s = np.zeros(x.shape[:-1])
    c = np.zeros(x.shape[:-1])
    for k in range(x.shape[-1]):
        v = x[..., k]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c = c + np.where(big, (s - t) + v, (v - t) + s)
        s = t
    out = s + c
    return float(out) if out.ndim == 0 else out


def compensated_cumsum(x, axis: int = -1) -> np.ndarray:
    """Running Neumaier sums with a leading zero (length ``n + 1`` along ``axis``)."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (n + 1,))
    s = np.zeros(x.shape[:-1])
    c = np.zeros(x.shape[:-1])
    for k in range(n):
        v = x[..., k]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c = c + np.where(big, (s - t) + v, (v - t) + s)
        s = t
        out[..., k + 1] = s + c
    return np.moveaxis(out, -1, axis)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a  # 2**27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def cell_mass_terms(values, breakpoints) -> np.ndarray:
    """Error-free expansion of ``values * diff(breakpoints)``: shape ``(..., k, 4)``.

    The four terms of each cell sum exactly to the real product of the stored
    value and the exact real width of the cell.
    """
    x = np.asarray(breakpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    w_hi, w_lo = _two_sum(x[1:], -x[:-1])
    p1, e1 = _two_prod(v, w_hi)
    p2, e2 = _two_prod(v, w_lo)
    return np.stack(np.broadcast_arrays(p1, e1, p2, e2), axis=-1)


def cell_masses_cumsum(values, breakpoints) -> np.ndarray:
    """Running integrals at the breakpoints (leading 0), from the exact cell masses."""
    terms = cell_mass_terms(values, breakpoints)
    flat = terms.reshape(terms.shape[:-2] + (-1,))
    return compensated_cumsum(flat)[..., ::4]


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    """The admissible box ``m <= f <= M`` with ``m < 0 < M``.

    ``peak`` is the largest possible ``|J(f)|`` and ``c0``/``c1`` are the jump
    locations of the two extremal functions. They are computed once here and
    reused everywhere so that envelopes, extremizers and searches agree bitwise.
    """

    m: float
    M: float
    peak: float = field(init=False, repr=False)
    c0: float = field(init=False, repr=False)
    c1: float = field(init=False, repr=False)

    def __post_init__(self):
        m, M = self.m, self.M
        if not (math.isfinite(m) and math.isfinite(M)):
            raise ValueError(f"bounds must be finite, got m={m!r}, M={M!r}")
        if not (m < 0 < M):
            raise ValueError(f"requires m < 0 < M, got m={m!r}, M={M!r}")
        # correctly rounded from the exact rationals m, M: the extremizers' means
        # are then as close to zero as a single float breakpoint allows
        qm, qM = Fraction(float(m)), Fraction(float(M))
        span = qM - qm
        object.__setattr__(self, "m", float(m))
        object.__setattr__(self, "M", float(M))
        object.__setattr__(self, "peak", float(-qm * qM / span))
        object.__setattr__(self, "c0", float(-qm / span))
        object.__setattr__(self, "c1", float(qM / span))

    @property
    def span(self) -> float:
        return self.M - self.m

    def as_dict(self) -> dict:
        return {"m": self.m, "M": self.M, "peak": self.peak, "c0": self.c0, "c1": self.c1}


def make_bounds(m: float, M: float) -> Bounds:
    return Bounds(float(m), float(M))


# ---------------------------------------------------------------------------
# Step functions and primitives
# ---------------------------------------------------------------------------


def _check_partition(x: np.ndarray, what: str) -> None:
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"{what} needs at least two points")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} must be finite")
    if x[0] != 0.0 or x[-1] != 1.0:
        raise ValueError(f"{what} must start at 0 and end at 1")
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{what} must be strictly increasing (zero-width cells are rejected)")


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant function: ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``.

    The last cell is closed on the right. Adjacent equal values are kept as
    given; call :meth:`merged` to normalize.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _frozen(self.breakpoints)
        vals = _frozen(self.values)
        _check_partition(bp, "breakpoints")
        if vals.shape != (bp.size - 1,):
            raise ValueError(f"expected {bp.size - 1} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "StepFunction":
        """Step function on the uniform grid ``i / n``."""
        values = np.asarray(values, dtype=float)
        return cls(uniform_grid(values.size), values)

    @property
    def cells(self) -> int:
        return self.values.size

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self.cells - 1)
        return self.values[idx]

    def mean(self) -> float:
        return mean(self)

    def is_admissible(self, b: Bounds, eps_mean: float = EPS_MEAN) -> bool:
        return admissibility(self, b, eps_mean)["admissible"]

    def refine(self, points: Sequence[float]) -> "StepFunction":
        """Same function with extra breakpoints inserted."""
        pts = np.asarray(points, dtype=float)
        pts = pts[(pts > 0.0) & (pts < 1.0)]
        bp = np.union1d(self.breakpoints, pts)
        return StepFunction(bp, self(bp[:-1]))

    def merged(self) -> "StepFunction":
        """Drop breakpoints between adjacent cells carrying the same value."""
        keep = np.ones(self.breakpoints.size, dtype=bool)
        keep[1:-1] = self.values[1:] != self.values[:-1]
        bp = self.breakpoints[keep]
        return StepFunction(bp, self(bp[:-1]))

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if not isinstance(other, StepFunction):
            return NotImplemented
        bp = np.union1d(self.breakpoints, other.breakpoints)
        left = bp[:-1]
        return StepFunction(bp, self(left) + other(left))

    def __mul__(self, scalar: float) -> "StepFunction":
        return StepFunction(self.breakpoints, float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.breakpoints, -self.values)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    __hash__ = None


def uniform_grid(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one cell")
    return np.arange(n + 1, dtype=float) / n


def mean(f: StepFunction) -> float:
    """Correctly rounded ``sum values_i * width_i`` (exact widths, exact products)."""
    return math.fsum(cell_mass_terms(f.values, f.breakpoints).reshape(-1).tolist())


def admissibility(f: StepFunction, b: Bounds, eps_mean: float = EPS_MEAN) -> dict:
    """Diagnostics for membership in the bounded mean-zero class."""
    mu = mean(f)
    lo = float(f.values.min())
    hi = float(f.values.max())
    in_box = lo >= b.m and hi <= b.M
    return {
        "admissible": bool(in_box and abs(mu) <= eps_mean),
        "mean": mu,
        "min_value": lo,
        "max_value": hi,
        "in_box": bool(in_box),
    }


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Continuous function interpolating ``node_values`` linearly between ``nodes``."""

    nodes: np.ndarray
    node_values: np.ndarray

    def __post_init__(self):
        x = _frozen(self.nodes)
        y = _frozen(self.node_values)
        _check_partition(x, "nodes")
        if y.shape != x.shape:
            raise ValueError("one value per node required")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "node_values", y)

    def __call__(self, x):
        return np.interp(x, self.nodes, self.node_values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.node_values) / np.diff(self.nodes)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.node_values)))

    def integral(self) -> float:
        w = np.diff(self.nodes)
        return compensated_sum(0.5 * w * (self.node_values[:-1] + self.node_values[1:]))

    def __neg__(self) -> "PiecewiseLinear":
        return PiecewiseLinear(self.nodes, -self.node_values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinear):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(
            self.node_values, other.node_values
        )

    __hash__ = None


def primitive(f: StepFunction) -> PiecewiseLinear:
    """Running integral ``x -> int_0^x f``, exact at the breakpoints."""
    return PiecewiseLinear(f.breakpoints, cell_masses_cumsum(f.values, f.breakpoints))


def first_moment(f: StepFunction) -> float:
    """``int_0^1 x f(x) dx`` summed cell by cell."""
    x = f.breakpoints
    return compensated_sum(0.5 * f.values * (x[1:] - x[:-1]) * (x[1:] + x[:-1]))


# ---------------------------------------------------------------------------
# Monotone weights
# ---------------------------------------------------------------------------

_KINDS = ("power", "shifted_log", "table", "custom")


@dataclass(frozen=True, eq=False)
class MonotoneWeight:
    """Nondecreasing weight on ``[0, T]``.

    Use the constructors :meth:`power`, :meth:`shifted_log`, :meth:`table` and
    :meth:`from_callable` rather than instantiating directly. ``convex`` is
    known for the first two families and caller-asserted for the others.
    """

    kind: str
    T: float
    param: Optional[float] = None
    knots: Optional[np.ndarray] = None
    knot_values: Optional[np.ndarray] = None
    func: Optional[Callable] = None
    convex: bool = False
    label: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.T > 0:
            raise ValueError("domain cap T must be positive")

    # constructors -------------------------------------------------------

    @classmethod
    def power(cls, p: float, T: float = math.inf) -> "MonotoneWeight":
        p = float(p)
        if not (math.isfinite(p) and p > 0):
            raise ValueError(f"power exponent must be finite and > 0, got {p!r}")
        return cls("power", float(T), param=p, convex=p >= 1, label=f"pow:{p:g}")

    @classmethod
    def shifted_log(cls, eps: float, T: float = math.inf) -> "MonotoneWeight":
        eps = float(eps)
        if not (math.isfinite(eps) and eps >= 0):
            raise ValueError(f"log shift must be finite and >= 0, got {eps!r}")
        return cls("shifted_log", float(T), param=eps, convex=False, label=f"log:{eps:g}")

    @classmethod
    def table(cls, xs: Sequence[float], ys: Sequence[float], convex: bool = False,
              label: str = "table") -> "MonotoneWeight":
        xs = _frozen(xs)
        ys = _frozen(ys)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("table needs at least two (x, phi) pairs of equal length")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("table entries must be finite")
        if xs[0] != 0.0:
            raise ValueError("table must start at x = 0")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("table x must be strictly increasing")
        if np.any(np.diff(ys) < -EPS_MONO):
            raise ValueError("table weight is not nondecreasing")
        return cls("table", float(xs[-1]), knots=xs, knot_values=ys, convex=convex, label=label)

    @classmethod
    def from_callable(cls, func: Callable, T: float, convex: bool = False,
                      label: str = "custom", check_points: int = 1001) -> "MonotoneWeight":
        """Wrap a vectorized callable, rejecting it if sampled values ever decrease."""
        T = float(T)
        if not (math.isfinite(T) and T > 0):
            raise ValueError("custom weights need a finite positive domain cap")
        grid = np.linspace(0.0, T, check_points)
        vals = np.asarray(func(grid), dtype=float)
        if np.any(np.diff(vals) < -EPS_MONO):
            raise ValueError("custom weight is not nondecreasing on its domain")
        return cls("custom", T, func=func, convex=convex, label=label)

    @classmethod
    def constant(cls, c: float, T: float) -> "MonotoneWeight":
        return cls.table([0.0, T], [c, c], convex=True, label=f"const:{c:g}")

    # evaluation ---------------------------------------------------------

    @property
    def has_closed_form(self) -> bool:
        return self.kind != "custom"

    def _check_domain(self, x: np.ndarray) -> np.ndarray:
        if np.any(np.isnan(x)):
            raise ValueError("weight evaluated at NaN")
        if np.any(x < 0):
            raise ValueError("weight evaluated below 0")
        cap = self.T + DOMAIN_SLACK * max(1.0, self.T) if math.isfinite(self.T) else math.inf
        if np.any(x > cap):
            raise ValueError(f"weight evaluated beyond its domain cap T={self.T!r}")
        return np.minimum(x, self.T)

    def __call__(self, x):
        x = self._check_domain(np.asarray(x, dtype=float))
        if self.kind == "power":
            return x ** self.param
        if self.kind == "shifted_log":
            with np.errstate(divide="ignore"):
                return np.log(self.param + x)
        if self.kind == "table":
            return np.interp(x, self.knots, self.knot_values)
        return np.asarray(self.func(x), dtype=float)

    def is_constant_on(self, t: float) -> bool:
        """True when the weight is constant on ``(0, t)`` (only tables can be)."""
        if self.kind != "table":
            return False
        inner = self.knots < t
        vals = np.append(self.knot_values[inner], self(np.array(t)))
        return bool(np.ptp(vals) == 0.0)

    def spec(self) -> str:
        return self.label


def weight_eval(phi: MonotoneWeight, x: float) -> float:
    """Evaluate ``phi`` at ``x``; ``shifted_log(0)`` at 0 returns ``-inf``."""
    return float(phi(np.asarray(x, dtype=float)))
