"""
Sharp bounds for the primitive of a bounded mean-zero function
==============================================================

For a step function f on [0, 1] with m <= f <= M and zero mean, the
primitive J(x) = int_0^x f never exceeds the peak height h* = -mM/(M-m).
Averaging a nondecreasing weight phi over [0, h*] bounds int phi(|J|).
"""

import math

from meanzero import MonotoneWeight, make_bounds
from meanzero.functionals import (
    corollary1_bound,
    corollary2_bound,
    kouba_bound,
    perfetti_bound,
    theorem1_bound,
    thong_bound,
)

b = make_bounds(-1.0, 2.0)
print(f"box [{b.m}, {b.M}]: peak h* = {b.peak:.6f}, crossovers c0 = {b.c0:.6f}, c1 = {b.c1:.6f}")

# The L^p bounds are h* times a coefficient that depends only on p
for p in (1, 2, 3, 10):
    coef = corollary1_bound(b, p) / b.peak
    print(f"p = {p:>2}: ||J||_p <= {coef:.12f} * h*   ((p+1)^(-1/p) = {(p + 1) ** (-1 / p):.12f})")

# p = 1 gives 1/2, p = 2 gives 1/sqrt(3); the geometric mean gives 1/e
print(f"1/2     -> {corollary1_bound(b, 1) / b.peak!r}")
print(f"1/sqrt3 -> {corollary1_bound(b, 2) / b.peak!r}  vs {1 / math.sqrt(3)!r}")
print(f"1/e     -> {corollary2_bound(b) / b.peak!r}  vs {1 / math.e!r}")

# The older estimates, side by side
print(f"thong h*/2 = {thong_bound(b):.6f}, kouba h*/sqrt3 = {kouba_bound(b):.6f}")
print(f"int J^2: sharp {theorem1_bound(b, MonotoneWeight.power(2)):.6f} "
      f"<= earlier {perfetti_bound(b):.6f}")
