"""
Looking for counterexamples at random
=====================================

Draw seeded random admissible step functions and evaluate every inequality on
them. Violations would falsify the bounds; the minimum slack shows how close
random functions get to the extremal case.
"""

from meanzero import MonotoneWeight, make_bounds
from meanzero.extremal import extremal
from meanzero.sampling import SamplerConfig, campaign

b = make_bounds(-1.0, 2.0)
weights = [MonotoneWeight.power(1), MonotoneWeight.power(2), MonotoneWeight.shifted_log(0.01)]

for scheme in ("uniform_project", "vertex_jitter"):
    rep = campaign(b, weights, 5000, SamplerConfig(cells=64, seed=1, scheme=scheme))
    print(f"{scheme}: {rep.violations} violations")
    for c in rep.checks:
        print(f"  {c.name:<22} min slack {c.min_slack: .3e} at sample {c.argmin}")

# Adding the extremizer to the pool drives the minimum slack to zero
rep = campaign(b, weights[0], 5000, SamplerConfig(cells=64, seed=1), extra_samples=[extremal(b, "f0")])
print(f"with f0 appended: min slack {rep.min_slack:.1e} from sample {rep.argmin_seed_index}")
