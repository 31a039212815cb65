"""Maximizing int phi(|J(f)|) over the discretized feasible polytope.

On a uniform ``n``-cell grid the feasible set is the polytope
``{v in [m, M]^n : sum v_i = 0}``. Its vertices carry ``m`` or ``M`` in every
cell except at most one, so for a convex weight the exact discrete maximum is
found by enumerating them. For other weights a multistart local search gives
heuristic (non-certifying) lower evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import Bounds, MonotoneWeight, StepFunction, cell_masses_cumsum, uniform_grid
from .functionals import lhs_from_nodes, theorem1_bound
from .sampling import SamplerConfig, _absorb_residual, sample_values

MAX_ENUM_CELLS = 24
IMPROVE_TOL = 1e-12
SOUNDNESS_TOL = 1e-9
_BATCH = 4096
_MAX_STEPS = 10_000


@dataclass(frozen=True)
class Vertex:
    cells: int
    high_set: frozenset
    frac_index: Optional[int] = None
    frac_value: float = 0.0

    def values(self, b: Bounds) -> np.ndarray:
        v = np.full(self.cells, b.m)
        v[list(self.high_set)] = b.M
        if self.frac_index is not None:
            v[self.frac_index] = self.frac_value
        return v


def enumerate_vertices(b: Bounds, n: int) -> Iterator[Vertex]:
    """Every vertex of the discretized polytope, each exactly once.

    Fractional vertices come first, grouped by the fractional cell. A
    fractional value landing exactly on ``m`` or ``M`` is reported as the
    corresponding binary vertex; binary vertices are deduplicated.
    """
    if n < 2:
        raise ValueError("need at least 2 cells")
    if n > MAX_ENUM_CELLS:
        raise ValueError(f"vertex enumeration is capped at n = {MAX_ENUM_CELLS}, got {n}")
    m, M = b.m, b.M
    seen = set()
    sizes = [s for s in range(n) if m <= -(s * M + (n - 1 - s) * m) <= M]
    for k in range(n):
        others = [i for i in range(n) if i != k]
        for s in sizes:
            frac = 0.0 - (s * M + (n - 1 - s) * m)
            for S in itertools.combinations(others, s):
                if frac == m or frac == M:
                    high = frozenset(S) | ({k} if frac == M else frozenset())
                    if high not in seen:
                        seen.add(high)
                        yield Vertex(n, high)
                    continue
                yield Vertex(n, frozenset(S), k, frac)
    for s in range(n + 1):
        if s * M + (n - s) * m == 0:
            for S in itertools.combinations(range(n), s):
                high = frozenset(S)
                if high not in seen:
                    seen.add(high)
                    yield Vertex(n, high)


def objective(values, phi: MonotoneWeight) -> np.ndarray:
    """LHS for rows of cell values on the uniform grid."""
    values = np.atleast_2d(values)
    grid = uniform_grid(values.shape[1])
    J = cell_masses_cumsum(values, grid)
    return np.atleast_1d(lhs_from_nodes(grid, J, phi))


@dataclass
class SearchResult:
    best: StepFunction
    value: float
    bound: float
    strategy: str
    certifying: bool
    evaluated: int = 0

    @property
    def gap(self) -> float:
        return self.bound - self.value

    @property
    def sound(self) -> bool:
        return self.gap >= -SOUNDNESS_TOL

    def as_dict(self) -> dict:
        return {
            "n": self.best.cells,
            "strategy": self.strategy,
            "value": self.value,
            "bound": self.bound,
            "gap": self.gap,
            "certifying": self.certifying,
            "evaluated": self.evaluated,
            "best": self.best.values.tolist(),
        }


class _Best:
    """Running argmax with ties broken by the lexicographically smallest vector."""

    def __init__(self):
        self.value = -np.inf
        self.values = None

    def offer(self, vals: np.ndarray, scores: np.ndarray) -> None:
        top = scores.max()
        if top < self.value:
            return
        cands = vals[scores == top]
        winner = cands[np.lexsort(cands.T[::-1])[0]]
        if top > self.value or tuple(winner) < tuple(self.values):
            self.value = float(top)
            self.values = winner.copy()


def _vertex_search(b: Bounds, phi: MonotoneWeight, n: int) -> tuple:
    best = _Best()
    count = 0
    it = enumerate_vertices(b, n)
    while True:
        chunk = [v.values(b) for v in itertools.islice(it, _BATCH)]
        if not chunk:
            break
        vals = np.array(chunk)
        best.offer(vals, objective(vals, phi))
        count += len(chunk)
    return best, count


def _moves(v: np.ndarray, b: Bounds, grid: np.ndarray) -> np.ndarray:
    """Candidate neighbours: mass transfers (full and half) and swaps."""
    n = v.size
    w = np.diff(grid)
    i, j = np.nonzero(~np.eye(n, dtype=bool))
    room = np.minimum((b.M - v[i]) * w[i], (v[j] - b.m) * w[j])
    out = []
    for scale in (1.0, 0.5):
        d = scale * room
        keep = d > 0
        c = np.repeat(v[None, :], keep.sum(), axis=0)
        r = np.arange(c.shape[0])
        c[r, i[keep]] = np.minimum(v[i[keep]] + d[keep] / w[i[keep]], b.M)
        c[r, j[keep]] = np.maximum(v[j[keep]] - d[keep] / w[j[keep]], b.m)
        out.append(c)
    a, z = np.triu_indices(n, 1)
    differ = v[a] != v[z]
    c = np.repeat(v[None, :], differ.sum(), axis=0)
    r = np.arange(c.shape[0])
    c[r, a[differ]] = v[z[differ]]
    c[r, z[differ]] = v[a[differ]]
    out.append(c)
    cands = np.concatenate(out)
    if cands.size:
        _absorb_residual(cands, grid, b)
    return cands


def _local_search(b: Bounds, phi: MonotoneWeight, n: int, restarts: int, seed: int) -> tuple:
    grid = uniform_grid(n)
    best = _Best()
    count = 0
    for r in range(restarts):
        scheme = "uniform_project" if r % 2 == 0 else "vertex_jitter"
        v = sample_values(b, SamplerConfig(cells=n, seed=seed, scheme=scheme), r, 1)[0]
        val = objective(v, phi)[0]
        count += 1
        for _ in range(_MAX_STEPS):
            cands = _moves(v, b, grid)
            if not cands.size:
                break
            scores = objective(cands, phi)
            count += len(cands)
            better = np.nonzero(scores > val + IMPROVE_TOL)[0]
            if not better.size:
                break
            k = better[0]
            v, val = cands[k], scores[k]
        best.offer(v[None, :], np.array([val]))
    return best, count


def search_max(b: Bounds, phi: MonotoneWeight, n: int, strategy: str = "vertex_enum",
               restarts: int = 50, seed: int = 0) -> SearchResult:
    """Largest discrete LHS on ``n`` cells and its gap to the sharp bound.

    ``vertex_enum`` is exact but needs a convex weight; ``local_search`` is a
    first-improvement multistart heuristic whose result is labeled
    non-certifying.
    """
    bound = theorem1_bound(b, phi)
    if strategy == "vertex_enum":
        if not phi.convex:
            raise ValueError(f"vertex enumeration needs a convex weight; {phi.spec()} is not marked convex")
        best, count = _vertex_search(b, phi, n)
        certifying = True
    elif strategy == "local_search":
        if n < 2:
            raise ValueError("need at least 2 cells")
        if restarts < 1:
            raise ValueError("restarts must be positive")
        best, count = _local_search(b, phi, n, restarts, seed)
        certifying = False
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return SearchResult(
        best=StepFunction.uniform(best.values),
        value=best.value,
        bound=bound,
        strategy=strategy,
        certifying=certifying,
        evaluated=count,
    )


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    def gaps(self) -> list:
        return [r[2] for r in self.rows]

    @property
    def monotone(self) -> bool:
        """Gaps do not grow along refinements (``n`` dividing the next ``n``)."""
        for (n0, _, g0), (n1, _, g1) in zip(self.rows, self.rows[1:]):
            if n1 % n0 == 0 and g1 > g0 + IMPROVE_TOL:
                return False
        return True


def convergence_study(b: Bounds, phi: MonotoneWeight, n_list: Sequence[int],
                      strategy: str = "vertex_enum", **kwargs) -> ConvergenceTable:
    n_list = list(n_list)
    if any(a >= c for a, c in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    table = ConvergenceTable()
    for n in n_list:
        res = search_max(b, phi, n, strategy, **kwargs)
        table.rows.append((n, res.value, res.gap))
    return table
