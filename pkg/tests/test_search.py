import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from meanzero.core import MonotoneWeight, StepFunction, make_bounds
from meanzero.extremal import discretized_extremal
from meanzero.functionals import lhs_integral, theorem1_bound
from meanzero.sampling import SamplerConfig, sample_values
from meanzero.search import (
    MAX_ENUM_CELLS,
    Vertex,
    convergence_study,
    enumerate_vertices,
    objective,
    search_max,
)

from oracles import exact_mean, lhs_quad

POW2 = MonotoneWeight.power(2)


def _vertex_set(b, n):
    return [tuple(v.values(b)) for v in enumerate_vertices(b, n)]


def test_two_cell_vertices():
    b = make_bounds(-1, 1)
    vs = _vertex_set(b, 2)
    assert sorted(vs) == [(-1.0, 1.0), (1.0, -1.0)]


def test_three_cell_filtering():
    b = make_bounds(-1, 2)
    verts = list(enumerate_vertices(b, 3))
    # |S| = 2 would need frac = -3 < m; only |S| = 1 (frac = -1 = m, binary) and |S| = 0 (frac = 2 = M) survive
    assert all(len(v.high_set) <= 1 for v in verts)
    assert sorted(_vertex_set(b, 3)) == [(-1.0, -1.0, 2.0), (-1.0, 2.0, -1.0), (2.0, -1.0, -1.0)]


def test_cap():
    b = make_bounds(-1, 1)
    with pytest.raises(ValueError, match="24"):
        next(enumerate_vertices(b, MAX_ENUM_CELLS + 1))
    with pytest.raises(ValueError):
        search_max(b, POW2, 25)


@pytest.mark.parametrize("m,M,n", [(-1, 1, 6), (-1, 2, 5), (-2, 3, 7), (-0.3, 1.7, 6)])
def test_vertices_unique_feasible(m, M, n):
    b = make_bounds(m, M)
    vs = _vertex_set(b, n)
    assert len(vs) == len(set(vs))
    for v in vs:
        arr = np.array(v)
        assert np.all(arr >= m) and np.all(arr <= M)
        assert np.count_nonzero((arr != m) & (arr != M)) <= 1
        assert abs(float(exact_mean(np.linspace(0, 1, n + 1), arr))) <= 1e-14 * (M - m)


@pytest.mark.parametrize("m,M,n", [(-1, 1, 6), (-1, 2, 5), (-2, 3, 7)])
def test_lp_vertices_are_enumerated(m, M, n):
    b = make_bounds(m, M)
    vs = np.array(_vertex_set(b, n))
    rng = np.random.default_rng(n)
    for _ in range(40):
        c = rng.normal(size=n)
        res = linprog(c, A_eq=np.ones((1, n)), b_eq=[0.0], bounds=[(m, M)] * n, method="highs")
        assert res.status == 0
        assert np.min(np.max(np.abs(vs - res.x), axis=1)) <= 1e-9


def test_vertex_values_helper():
    b = make_bounds(-1, 2)
    v = Vertex(4, frozenset({0}), 1, 0.0)
    np.testing.assert_array_equal(v.values(b), [2.0, 0.0, -1.0, -1.0])


def test_objective_matches_quadrature_oracle():
    b = make_bounds(-1, 2)
    rows = np.array(_vertex_set(b, 5)[:10])
    got = objective(rows, POW2)
    grid = np.linspace(0, 1, 6)
    for row, g in zip(rows, got):
        assert g == pytest.approx(lhs_quad(grid, row, lambda x: x ** 2), abs=1e-13)


def test_two_cells_symmetric_exact():
    res = search_max(make_bounds(-1, 1), POW2, 2)
    assert tuple(res.best.values) in {(1.0, -1.0), (-1.0, 1.0)}
    assert res.value == pytest.approx(1 / 12, abs=1e-15)
    assert res.gap <= 1e-10 and res.certifying


def _is_block_pattern(vals, m, M):
    """M-block then m-block (or mirror) with at most one fractional interface cell."""
    inner = [x for x in vals if x not in (m, M)]
    if len(inner) > 1:
        return False
    for a, z in ((M, m), (m, M)):
        k = 0
        while k < len(vals) and vals[k] == a:
            k += 1
        if k < len(vals) and vals[k] not in (a, z):
            k += 1
        if all(x == z for x in vals[k:]):
            return True
    return False


def test_twelve_cells_symmetric():
    b = make_bounds(-1, 1)
    res = search_max(b, POW2, 12)
    assert res.value <= 1 / 12 + 1e-15
    assert res.gap <= 0.02 / 12
    assert _is_block_pattern(list(res.best.values), -1.0, 1.0)


def test_twelve_cells_asymmetric_within_five_percent():
    b = make_bounds(-1, 2)
    res = search_max(b, POW2, 12)
    assert res.bound == pytest.approx(4 / 27, rel=1e-15)
    assert res.gap <= 0.05 * 4 / 27
    # 12 * c0 = 4 is integral, so the extremizer itself is a vertex
    assert res.gap <= 1e-10


@pytest.mark.parametrize("m,M,n", [(-1, 1, 2), (-1, 1, 8), (-1, 2, 3), (-1, 2, 6), (-1, 2, 12),
                                   (-1, 3, 4), (-1, 3, 8), (-2, 3, 5), (-2, 3, 10)])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_on_grid_crossover_attains_bound(m, M, n, p):
    b = make_bounds(m, M)
    phi = MonotoneWeight.power(p)
    res = search_max(b, phi, n)
    assert res.gap <= 1e-10
    vals = res.best.values
    f0 = discretized_extremal(b, "f0", n)
    f1 = discretized_extremal(b, "f1", n)
    assert np.array_equal(vals, f0) or np.array_equal(vals, f1)


@pytest.mark.parametrize("m,M", [(-1, 2), (-0.4, 1.3)])
@pytest.mark.parametrize("n", [4, 5, 8, 11])
@pytest.mark.parametrize("phi", [MonotoneWeight.power(1), POW2, MonotoneWeight.power(4)], ids=str)
def test_soundness(m, M, n, phi):
    b = make_bounds(m, M)
    res = search_max(b, phi, n)
    assert res.value <= theorem1_bound(b, phi) + 1e-9
    assert res.sound
    assert res.value == pytest.approx(lhs_integral(res.best, phi), abs=1e-14)


@pytest.mark.parametrize("m,M", [(-1, 1), (-1, 2), (-0.5, 3)])
@pytest.mark.parametrize("n", [4, 7, 12])
def test_local_search_matches_vertex_oracle(m, M, n):
    b = make_bounds(m, M)
    exact = search_max(b, POW2, n)
    heur = search_max(b, POW2, n, "local_search", restarts=50, seed=1)
    assert not heur.certifying
    assert heur.value >= exact.value - 1e-9
    assert heur.value <= exact.value + 1e-12
    assert heur.best.is_admissible(b)


def test_local_search_deterministic():
    b = make_bounds(-1, 2)
    a = search_max(b, POW2, 6, "local_search", restarts=5, seed=3)
    c = search_max(b, POW2, 6, "local_search", restarts=5, seed=3)
    assert a.value == c.value and a.best == c.best


def test_local_search_nonconvex_weight_is_sound():
    b = make_bounds(-1, 2)
    phi = MonotoneWeight.power(0.5)
    res = search_max(b, phi, 9, "local_search", restarts=10)
    assert res.sound and not res.certifying
    assert res.gap >= -1e-9


def test_nonconvex_rejected_by_enumeration():
    b = make_bounds(-1, 1)
    for phi in (MonotoneWeight.power(0.5), MonotoneWeight.shifted_log(0.1)):
        with pytest.raises(ValueError, match="convex"):
            search_max(b, phi, 6)
    table = MonotoneWeight.table([0.0, 1.0], [0.0, 1.0], convex=True)
    assert search_max(b, table, 4).sound


def test_unknown_strategy():
    with pytest.raises(ValueError):
        search_max(make_bounds(-1, 1), POW2, 4, "annealing")


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_objective_convexity(lam):
    b = make_bounds(-1, 2)
    vals = sample_values(b, SamplerConfig(cells=32, seed=4, scheme="vertex_jitter"), 0, 200)
    g, h = vals[:100], vals[100:]
    mix = objective(lam * g + (1 - lam) * h, POW2)
    assert np.all(mix <= lam * objective(g, POW2) + (1 - lam) * objective(h, POW2) + 1e-10)


def test_convergence_symmetric_on_grid():
    table = convergence_study(make_bounds(-1, 1), POW2, [2, 4, 8])
    assert [r[0] for r in table.rows] == [2, 4, 8]
    assert all(g <= 1e-10 for g in table.gaps())
    assert table.monotone


def test_convergence_asymmetric_on_grid():
    table = convergence_study(make_bounds(-1, 2), POW2, [3, 6, 12])
    assert all(g <= 1e-10 for g in table.gaps())


def test_convergence_asymmetric_off_grid():
    table = convergence_study(make_bounds(-1, 2), POW2, [4, 8, 16])
    gaps = table.gaps()
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 0.05 * 4 / 27
    assert table.monotone


def test_convergence_requires_ascending():
    with pytest.raises(ValueError):
        convergence_study(make_bounds(-1, 1), POW2, [4, 2])


def test_block_pattern_helper():
    assert _is_block_pattern([2.0, 0.5, -1.0, -1.0], -1.0, 2.0)
    assert _is_block_pattern([-1.0, -1.0, 2.0], -1.0, 2.0)
    assert not _is_block_pattern([2.0, -1.0, 2.0, -1.0], -1.0, 2.0)


def test_search_result_dict():
    res = search_max(make_bounds(-1, 1), POW2, 4)
    d = res.as_dict()
    assert d["strategy"] == "vertex_enum" and d["certifying"] is True
    assert d["value"] == res.value and d["gap"] == res.gap
    assert StepFunction.uniform(d["best"]) == res.best
    assert list(itertools.islice(enumerate_vertices(make_bounds(-1, 1), 4), 1))
