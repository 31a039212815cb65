"""
Averages of a nondecreasing weight grow with the window
=======================================================

K(phi, t) = (1/t) int_0^t phi is nondecreasing in t, which is why the bound is
taken at the largest reachable height h*. A constant weight gives a flat
plateau, which is reported rather than failed.
"""

from meanzero import MonotoneWeight
from meanzero.functionals import k_functional, lemma1_monotonicity_check

for phi in (MonotoneWeight.power(0.5), MonotoneWeight.power(5), MonotoneWeight.shifted_log(0)):
    rep = lemma1_monotonicity_check(phi, 2.0)
    ks = ", ".join(f"{k_functional(phi, t):.4f}" for t in (0.5, 1.0, 1.5, 2.0))
    print(f"{phi.spec():>6}: K at t = .5, 1, 1.5, 2 -> {ks}; {rep.violations} violations ({rep.note})")

flat = MonotoneWeight.table([0.0, 2.0], [1.0, 1.0])
print("constant table:", lemma1_monotonicity_check(flat, 2.0).note)
