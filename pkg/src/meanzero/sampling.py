"""Seeded random members of the bounded mean-zero class and verification campaigns.

Sample ``i`` of a run with seed ``s`` draws from its own Philox stream keyed by
``s`` with ``i`` in the top counter word, so any chunking or thread count
produces the same samples.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    Bounds,
    MonotoneWeight,
    StepFunction,
    cell_mass_terms,
    cell_masses_cumsum,
    compensated_sum,
    uniform_grid,
)
from .functionals import (
    envelope_neg_values,
    envelope_pos_values,
    lhs_from_nodes,
    theorem1_bound,
)

RNG_NAME = "numpy.random.Philox (4x64-10), key=seed, counter=[0,0,0,sample_index]"
SCHEMES = ("uniform_project", "vertex_jitter")
BISECTION_ITERS = 100
JITTER = 0.1
CHUNK = 1024

THEOREM_TOL = 1e-9
PEAK_TOL = 1e-12
ENVELOPE_TOL = 1e-12
MOMENT_TOL = 1e-12
DOMINANCE_GRID = 10_000


@dataclass(frozen=True)
class SamplerConfig:
    cells: int = 64
    seed: int = 0
    scheme: str = "uniform_project"

    def __post_init__(self):
        if int(self.cells) != self.cells or self.cells < 2:
            raise ValueError("cells must be an integer >= 2")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(index)]))


# ---------------------------------------------------------------------------
# Projection onto {m <= v <= M, sum v_i w_i = 0}
# ---------------------------------------------------------------------------


def project_zero_mean(values, b: Bounds, breakpoints=None) -> np.ndarray:
    """Shift-and-clip projection onto the zero-mean box (water filling).

    Finds ``s`` with ``sum w * clip(v - s, m, M) = 0`` by bisection (the
    clipped mean is continuous and nonincreasing in ``s``), then puts the
    residual into the lowest-index cell that can absorb it. Rows of a 2-D
    input are projected independently.
    """
    v = np.atleast_2d(np.asarray(values, dtype=float))
    n = v.shape[-1]
    x = uniform_grid(n) if breakpoints is None else np.asarray(breakpoints, dtype=float)
    w = np.diff(x)
    lo = v.min(axis=1) - b.M  # everything clips to M: mean > 0
    hi = v.max(axis=1) - b.m  # everything clips to m: mean < 0
    for _ in range(BISECTION_ITERS):
        s = 0.5 * (lo + hi)
        mu = np.sum(np.clip(v - s[:, None], b.m, b.M) * w, axis=1)
        up = mu > 0
        lo = np.where(up, s, lo)
        hi = np.where(up, hi, s)
    out = np.clip(v - 0.5 * (lo + hi)[:, None], b.m, b.M)
    _absorb_residual(out, x, b)
    return out if np.ndim(values) == 2 else out[0]


def _absorb_residual(v: np.ndarray, breakpoints: np.ndarray, b: Bounds) -> None:
    w = np.diff(breakpoints)
    resid = compensated_sum(cell_mass_terms(v, breakpoints).reshape(v.shape[0], -1))
    delta = resid[:, None] / w
    cand = v - delta
    ok = (cand >= b.m) & (cand <= b.M)
    has = ok.any(axis=1)
    idx = np.argmax(ok, axis=1)
    rows = np.nonzero(has)[0]
    v[rows, idx[rows]] = cand[rows, idx[rows]]


def _random_vertex(b: Bounds, n: int, rng: np.random.Generator) -> np.ndarray:
    high = int(math.floor(n * b.c0))
    order = rng.permutation(n)
    v = np.full(n, b.m)
    v[order[:high]] = b.M
    frac = -(high * b.M + (n - 1 - high) * b.m)
    v[order[high]] = min(max(frac, b.m), b.M)
    return v


def raw_draw(b: Bounds, cfg: SamplerConfig, index: int) -> np.ndarray:
    """Unprojected values for sample ``index``."""
    rng = sample_rng(cfg.seed, index)
    if cfg.scheme == "uniform_project":
        return b.m + b.span * rng.random(cfg.cells)
    v = _random_vertex(b, cfg.cells, rng)
    amp = JITTER * b.span
    return v + rng.uniform(-amp, amp, cfg.cells)


def sample_values(b: Bounds, cfg: SamplerConfig, start: int, count: int) -> np.ndarray:
    """Projected values for samples ``start .. start+count-1`` as rows."""
    raw = np.stack([raw_draw(b, cfg, i) for i in range(start, start + count)])
    return project_zero_mean(raw, b)


def sample_feasible(b: Bounds, cfg: SamplerConfig, index: int = 0) -> StepFunction:
    return StepFunction.uniform(sample_values(b, cfg, index, 1)[0])


# ---------------------------------------------------------------------------
# Campaigns
# ---------------------------------------------------------------------------


@dataclass
class CheckStats:
    name: str
    rhs: float
    tolerance: float
    violations: int = 0
    min_slack: float = math.inf
    lhs_at_min: float = math.nan
    argmin: int = -1

    def update(self, lhs: np.ndarray, slack: np.ndarray, offset: int) -> None:
        self.violations += int(np.count_nonzero(~(slack >= -self.tolerance)))
        k = int(np.argmin(slack))  # first occurrence: lowest sample index wins ties
        if slack[k] < self.min_slack:
            self.min_slack = float(slack[k])
            self.lhs_at_min = float(lhs[k])
            self.argmin = offset + k

    def merge(self, other: "CheckStats") -> None:
        self.violations += other.violations
        if other.min_slack < self.min_slack or (
            other.min_slack == self.min_slack and 0 <= other.argmin < self.argmin
        ):
            self.min_slack = other.min_slack
            self.lhs_at_min = other.lhs_at_min
            self.argmin = other.argmin

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs_at_min,
            "rhs": self.rhs,
            "slack": self.min_slack,
            "tolerance": self.tolerance,
            "violations": self.violations,
            "argmin_seed_index": self.argmin,
            "pass": self.passed,
        }


@dataclass
class CampaignReport:
    bounds: Bounds
    weights: tuple
    samples: int
    config: SamplerConfig
    checks: list
    argmin_values: Optional[list] = None
    argmin_breakpoints: Optional[list] = None
    rng: str = RNG_NAME
    extra: int = 0
    threads: int = 1

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks)

    def theorem_checks(self) -> list:
        return [c for c in self.checks if c.name.startswith("theorem1")]

    @property
    def min_slack(self) -> float:
        return min(c.min_slack for c in self.theorem_checks())

    @property
    def argmin_seed_index(self) -> int:
        best = min(self.theorem_checks(), key=lambda c: (c.min_slack, c.argmin))
        return best.argmin

    def check(self, name: str) -> CheckStats:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _campaign_checks(b: Bounds, weights, bounds_rhs) -> list:
    checks = [CheckStats(f"theorem1[{w.spec()}]", r, THEOREM_TOL) for w, r in zip(weights, bounds_rhs)]
    checks += [
        CheckStats("proposition1", b.peak, PEAK_TOL),
        CheckStats("envelope_pos", 0.0, ENVELOPE_TOL),
        CheckStats("envelope_neg", 0.0, ENVELOPE_TOL),
        CheckStats("moment_identity", MOMENT_TOL, 0.0),
    ]
    return checks


def evaluate_batch(b: Bounds, weights, rhs, breakpoints, values, offset: int,
                   grid: np.ndarray) -> list:
    """Run every campaign check on a batch of step functions sharing ``breakpoints``."""
    checks = _campaign_checks(b, weights, rhs)
    values = np.atleast_2d(values)
    w = np.diff(breakpoints)
    J = cell_masses_cumsum(values, breakpoints)
    for c, phi in zip(checks, weights):
        lhs = lhs_from_nodes(breakpoints, J, phi)
        c.update(lhs, c.rhs - lhs, offset)
    peak = np.max(np.abs(J), axis=1)
    checks[len(weights)].update(peak, b.peak - peak, offset)

    pos, neg = _envelope_excess(b, breakpoints, values, J, grid)
    checks[len(weights) + 1].update(pos, -pos, offset)
    checks[len(weights) + 2].update(neg, -neg, offset)

    moment = compensated_sum(0.5 * values * w * (breakpoints[1:] + breakpoints[:-1]))
    area = compensated_sum(0.5 * w * (J[:, :-1] + J[:, 1:]))
    resid = np.abs(moment + area)
    checks[-1].update(resid, MOMENT_TOL - resid, offset)
    return checks


def _envelope_excess(b: Bounds, breakpoints, values, J, grid, block: int = 32):
    """Row-wise ``max(J - env_pos)`` and ``max(-J - env_neg)`` over grid and nodes.

    Rows are processed in small blocks to keep the grid-sized temporaries in cache.
    """
    pos = np.max(J - envelope_pos_values(b, breakpoints), axis=1)
    neg = np.max(-J - envelope_neg_values(b, breakpoints), axis=1)
    cell = np.clip(np.searchsorted(breakpoints, grid, side="right") - 1, 0, breakpoints.size - 2)
    offset = grid - breakpoints[cell]
    env_pos = envelope_pos_values(b, grid)
    env_neg = envelope_neg_values(b, grid)
    for s in range(0, values.shape[0], block):
        Jg = np.take(J[s:s + block], cell, axis=1)  # J is linear on each cell
        tmp = np.take(values[s:s + block], cell, axis=1)
        tmp *= offset
        Jg += tmp
        np.subtract(Jg, env_pos, out=tmp)
        pos[s:s + block] = np.maximum(pos[s:s + block], tmp.max(axis=1))
        np.negative(Jg, out=Jg)
        Jg -= env_neg
        neg[s:s + block] = np.maximum(neg[s:s + block], Jg.max(axis=1))
    return pos, neg


def _threads() -> int:
    raw = os.environ.get("MEANZERO_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MEANZERO_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("MEANZERO_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def campaign(b: Bounds, weights: MonotoneWeight | Sequence[MonotoneWeight], n_samples: int,
             cfg: SamplerConfig, extra_samples: Sequence[StepFunction] = (),
             threads: Optional[int] = None, grid_points: int = DOMINANCE_GRID) -> CampaignReport:
    """Check every inequality on ``n_samples`` seeded random admissible functions.

    Samples are processed in fixed chunks of ``CHUNK`` and reduced with
    order-independent min/count operations, so the aggregates do not depend
    on ``threads``. ``extra_samples`` (for instance an extremizer) are
    appended with indices ``n_samples, n_samples + 1, ...``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if isinstance(weights, MonotoneWeight):
        weights = (weights,)
    weights = tuple(weights)
    if not weights:
        raise ValueError("at least one weight is required")
    rhs = [theorem1_bound(b, phi) for phi in weights]
    threads = _threads() if threads is None else max(1, int(threads))
    breakpoints = uniform_grid(cfg.cells)
    grid = np.linspace(0.0, 1.0, grid_points)

    def run(start: int) -> list:
        count = min(CHUNK, n_samples - start)
        vals = sample_values(b, cfg, start, count)
        return evaluate_batch(b, weights, rhs, breakpoints, vals, start, grid)

    starts = range(0, n_samples, CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    for j, f in enumerate(extra_samples):
        parts.append(evaluate_batch(b, weights, rhs, f.breakpoints, f.values[None, :],
                                    n_samples + j, grid))

    checks = parts[0]
    for part in parts[1:]:
        for acc, c in zip(checks, part):
            acc.merge(c)

    report = CampaignReport(
        bounds=b,
        weights=weights,
        samples=n_samples,
        config=cfg,
        checks=checks,
        extra=len(extra_samples),
        threads=threads,
    )
    idx = report.argmin_seed_index
    if idx >= n_samples:
        f = extra_samples[idx - n_samples]
        report.argmin_values = f.values.tolist()
        report.argmin_breakpoints = f.breakpoints.tolist()
    elif idx >= 0:
        report.argmin_values = sample_values(b, cfg, idx, 1)[0].tolist()
        report.argmin_breakpoints = breakpoints.tolist()
    return report
