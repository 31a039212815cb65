"""Sharp integral inequalities for primitives of bounded mean-zero functions.

For ``m < 0 < M`` and ``f`` on ``[0, 1]`` with ``m <= f <= M`` and zero mean,
``J(f)(x) = int_0^x f`` satisfies ``int phi(|J(f)|) <= K(phi, -mM/(M-m))`` for
every nondecreasing ``phi``, with equality for two explicit step functions.
This package computes those bounds, builds the extremizers, and checks both
the inequality and its sharpness numerically.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Bounds,
    MonotoneWeight,
    PiecewiseLinear,
    StepFunction,
    admissibility,
    first_moment,
    make_bounds,
    mean,
    primitive,
    weight_eval,
)
from .functionals import (  # noqa: E402
    KQuery,
    corollary1_bound,
    corollary2_bound,
    envelope_neg,
    envelope_pos,
    k_functional,
    kouba_bound,
    lemma1_monotonicity_check,
    lhs_integral,
    perfetti_bound,
    proposition1_bound,
    theorem1_bound,
    thong_bound,
)
from .extremal import ExtremalChoice, certify_equality, extremal, extremal_primitive  # noqa: E402
from .sampling import SamplerConfig, campaign, sample_feasible  # noqa: E402
from .search import convergence_study, enumerate_vertices, search_max  # noqa: E402

__all__ = [
    "Bounds",
    "ExtremalChoice",
    "KQuery",
    "MonotoneWeight",
    "PiecewiseLinear",
    "SamplerConfig",
    "StepFunction",
    "admissibility",
    "campaign",
    "certify_equality",
    "convergence_study",
    "corollary1_bound",
    "corollary2_bound",
    "enumerate_vertices",
    "envelope_neg",
    "envelope_pos",
    "extremal",
    "extremal_primitive",
    "first_moment",
    "k_functional",
    "kouba_bound",
    "lemma1_monotonicity_check",
    "lhs_integral",
    "make_bounds",
    "mean",
    "perfetti_bound",
    "primitive",
    "proposition1_bound",
    "sample_feasible",
    "search_max",
    "theorem1_bound",
    "thong_bound",
    "weight_eval",
]
