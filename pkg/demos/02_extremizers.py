"""
The two extremal functions
==========================

f0 jumps from M down to m at c0, f1 jumps from m up to M at c1. Their
primitives are the tents that bound every other primitive from above and
below, and both attain the sharp bound for any weight.
"""

import numpy as np

from meanzero import MonotoneWeight, make_bounds
from meanzero.core import mean, primitive
from meanzero.extremal import certify_equality, extremal
from meanzero.functionals import envelope_neg_values, envelope_pos_values

b = make_bounds(-0.5, 3.0)
f0, f1 = extremal(b, "f0"), extremal(b, "f1")
print("f0:", f0.breakpoints, f0.values, "mean", mean(f0))
print("f1:", f1.breakpoints, f1.values, "mean", mean(f1))

x = np.linspace(0, 1, 11)
print("   x    J(f0)  env_pos   J(f1)  -env_neg")
for xi, a, e, c, d in zip(x, primitive(f0)(x), envelope_pos_values(b, x),
                          primitive(f1)(x), -envelope_neg_values(b, x)):
    print(f"{xi:4.1f} {a:8.4f} {e:8.4f} {c:8.4f} {d:8.4f}")

for phi in (MonotoneWeight.power(0.5), MonotoneWeight.power(2), MonotoneWeight.shifted_log(0)):
    cert = certify_equality(b, phi)
    print(f"{phi.spec():>8}: bound {cert.bound:.12f}, gaps {cert.gap_f0:.1e} / {cert.gap_f1:.1e}")
