"""The two extremal step functions and certificates that they attain the bound."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Bounds, MonotoneWeight, PiecewiseLinear, StepFunction
from .functionals import envelope_neg, envelope_pos, lhs_integral, theorem1_bound

CLOSED_FORM_TOL = 1e-10
QUADRATURE_TOL = 1e-8


class ExtremalChoice(str, enum.Enum):
    F0 = "f0"
    F1 = "f1"


def extremal(b: Bounds, which: ExtremalChoice | str) -> StepFunction:
    """``f0`` is ``M`` then ``m`` with the jump at ``c0``; ``f1`` is ``m`` then ``M`` with the jump at ``c1``."""
    which = ExtremalChoice(which)
    if which is ExtremalChoice.F0:
        return StepFunction([0.0, b.c0, 1.0], [b.M, b.m])
    return StepFunction([0.0, b.c1, 1.0], [b.m, b.M])


def extremal_primitive(b: Bounds, which: ExtremalChoice | str) -> PiecewiseLinear:
    """Primitive of the extremizer, returned node-exactly as the matching envelope."""
    which = ExtremalChoice(which)
    if which is ExtremalChoice.F0:
        return envelope_pos(b)
    return -envelope_neg(b)


def discretized_extremal(b: Bounds, which: ExtremalChoice | str, n: int) -> np.ndarray:
    """Cell averages of the extremizer on the uniform ``n``-cell grid.

    The jump position in grid units is computed exactly from ``m`` and ``M``,
    so a crossover on the grid gives a purely two-valued vector.
    """
    which = ExtremalChoice(which)
    if n < 1:
        raise ValueError("need at least one cell")
    qm, qM = Fraction(b.m), Fraction(b.M)
    if which is ExtremalChoice.F0:
        first, second, cross = b.M, b.m, -qm / (qM - qm)
    else:
        first, second, cross = b.m, b.M, qM / (qM - qm)
    k = n * cross
    j = math.floor(k)
    vals = np.full(n, second)
    vals[:j] = first
    if k != j:
        phi = k - j
        vals[j] = float(phi * Fraction(first) + (1 - phi) * Fraction(second))
    return vals


@dataclass(frozen=True)
class EqualityCertificate:
    weight: str
    bound: float
    lhs_f0: float
    lhs_f1: float
    gap_f0: float
    gap_f1: float
    tolerance: float
    constant_weight: bool

    @property
    def passed(self) -> bool:
        return self.gap_f0 <= self.tolerance and self.gap_f1 <= self.tolerance


def certify_equality(b: Bounds, phi: MonotoneWeight) -> EqualityCertificate:
    """Both extremizers must reach the sharp bound.

    ``constant_weight`` marks weights that are constant below the peak, where
    every admissible function attains the bound and uniqueness is void.
    """
    bound = theorem1_bound(b, phi)
    l0 = lhs_integral(extremal(b, "f0"), phi)
    l1 = lhs_integral(extremal(b, "f1"), phi)
    tol = CLOSED_FORM_TOL if phi.has_closed_form else QUADRATURE_TOL
    return EqualityCertificate(
        weight=phi.spec(),
        bound=bound,
        lhs_f0=l0,
        lhs_f1=l1,
        gap_f0=_gap(bound, l0),
        gap_f1=_gap(bound, l1),
        tolerance=tol,
        constant_weight=phi.is_constant_on(b.peak),
    )


def _gap(bound: float, lhs: float) -> float:
    # log:0 gives -inf on both sides only in degenerate cases; equal infinities count as no gap
    if bound == lhs:
        return 0.0
    return abs(bound - lhs)
