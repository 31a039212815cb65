"""
Sharpness by exhaustive search
==============================

On a uniform n-cell grid the admissible functions form a polytope. For a
convex weight the largest value sits at a vertex, so enumerating vertices gives
the exact discrete maximum. It reaches the bound when the crossover lies on
the grid and approaches it as the grid refines otherwise.
"""

from meanzero import MonotoneWeight, make_bounds
from meanzero.search import convergence_study, search_max

b = make_bounds(-1.0, 2.0)
phi = MonotoneWeight.power(2)
print(f"bound K(phi, h*) = {search_max(b, phi, 3).bound:.10f} (= 4/27)")

for ns in ([3, 6, 12], [4, 8, 16]):
    table = convergence_study(b, phi, ns)
    for n, value, gap in table.rows:
        print(f"n = {n:>2}: max {value:.10f}, gap {gap:.3e}")

best = search_max(b, phi, 8).best
print("best 8-cell vertex:", best.values)

# Local search needs no convexity, but its answer is only a lower estimate
res = search_max(b, MonotoneWeight.power(0.5), 10, "local_search", restarts=20)
print(f"pow:0.5, n = 10, local search: value {res.value:.6f}, bound {res.bound:.6f}, "
      f"certifying={res.certifying}")
