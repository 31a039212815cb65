"""Weight-spec parsing and stable JSON/CSV serialization of reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import Bounds, MonotoneWeight
from .extremal import EqualityCertificate
from .sampling import CampaignReport

SCHEMA = 1
TOOL = "meanzero"


def parse_weight(spec: str) -> MonotoneWeight:
    """Parse ``pow:<p>``, ``log:<eps>`` or ``table:<path>``."""
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ValueError(f"weight spec must look like pow:<p>, log:<eps> or table:<path>, got {spec!r}")
    if kind == "pow":
        return MonotoneWeight.power(_number(arg, spec))
    if kind == "log":
        return MonotoneWeight.shifted_log(_number(arg, spec))
    if kind == "table":
        xs, ys = read_table(arg)
        return MonotoneWeight.table(xs, ys, label=spec)
    raise ValueError(f"unknown weight kind {kind!r} in {spec!r}")


def _number(text: str, spec: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"not a number in weight spec {spec!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"weight parameter must be finite in {spec!r}")
    return value


def read_table(path) -> tuple:
    """Two-column CSV ``x,phi``; an optional ``x,phi`` header row is skipped."""
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"table file not found: {path}")
    xs, ys = [], []
    with p.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and [c.strip() for c in row] == ["x", "phi"]:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number") from None
    return xs, ys


def write_table(path, xs, ys) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "phi"])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])


# ---------------------------------------------------------------------------
# Verification reports
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    bounds: dict
    weights: list
    checks: list
    campaign: dict
    timing: Optional[dict] = None
    tool: str = TOOL
    version: str = __version__
    schema: int = SCHEMA

    @property
    def violations(self) -> int:
        return self.campaign.get("violations", 0)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and all(c["pass"] for c in self.checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        order = ["schema", "tool", "version", "bounds", "weights", "checks", "campaign", "timing"]
        return {k: d[k] for k in order}

    def to_json(self) -> str:
        # repr-based floats: shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(
            bounds=d["bounds"],
            weights=d["weights"],
            checks=d["checks"],
            campaign=d["campaign"],
            timing=d.get("timing"),
            tool=d["tool"],
            version=d["version"],
            schema=d["schema"],
        )

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))


def certificate_records(cert: EqualityCertificate) -> list:
    return [
        {
            "name": f"equality[{cert.weight}][{which}]",
            "lhs": lhs,
            "rhs": cert.bound,
            "slack": cert.bound - lhs if cert.bound != lhs else 0.0,
            "tolerance": cert.tolerance,
            "pass": gap <= cert.tolerance,
        }
        for which, lhs, gap in (("f0", cert.lhs_f0, cert.gap_f0), ("f1", cert.lhs_f1, cert.gap_f1))
    ]


def build_report(b: Bounds, weights, campaign_report: CampaignReport, certificates,
                 timing: Optional[dict] = None) -> VerificationReport:
    c = campaign_report
    return VerificationReport(
        bounds=b.as_dict(),
        weights=[w.spec() for w in weights],
        checks=[rec for cert in certificates for rec in certificate_records(cert)],
        campaign={
            "samples": c.samples,
            "extra_samples": c.extra,
            "cells": c.config.cells,
            "seed": c.config.seed,
            "scheme": c.config.scheme,
            "rng": c.rng,
            "violations": c.violations,
            "min_slack": c.min_slack,
            "argmin_seed_index": c.argmin_seed_index,
            "argmin_sample": {"breakpoints": c.argmin_breakpoints, "values": c.argmin_values},
            "checks": [chk.as_dict() for chk in c.checks],
        },
        timing=timing,
    )


def extremal_rows(f, J, grid: int) -> list:
    """``(x, f(x), J(x))`` at ``i/grid`` and at the exact breakpoints, sorted."""
    xs = np.union1d(np.arange(grid + 1) / grid, f.breakpoints)
    return [(float(x), float(f(x)), float(J(x))) for x in xs]


def write_extremal_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "f", "J"])
        for row in rows:
            w.writerow([repr(v) for v in row])
