"""Versioned, deterministic verification reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

SCHEMA = "horolab/1"

# Exact checks have no tolerance; the rest follow this ladder unless overridden.
TOLERANCE_LADDER = {
    "algebraic": 1e-10,
    "factorization": 1e-9,
    "integrator": 1e-6,
    "fd": 1e-4,
    "cmc": 1e-3,
}

# significant digits kept for floats, so reports do not expose last-bit noise
_DIGITS = 12


@dataclass
class CheckResult:
    id: str
    worst_residual: Any  # float, or an exact rational for exact checks
    tolerance: float | str  # "exact" for zero-tolerance checks
    worst_node: int = -1
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.tolerance == "exact":
            return self.worst_residual == 0
        r = float(self.worst_residual)
        return math.isfinite(r) and r <= float(self.tolerance)

    def as_dict(self) -> dict:
        out = {
            "id": self.id,
            "status": "pass" if self.passed else "fail",
            "worst_residual": self.worst_residual,
            "tolerance": self.tolerance,
            "worst_node": self.worst_node,
        }
        if self.info:
            out["info"] = self.info
        return out


def exact_check(name: str, ok: bool, **info) -> CheckResult:
    """A boolean exact fact reported with residual 0 (holds) or 1 (fails)."""
    return CheckResult(name, 0 if ok else 1, "exact", info=info)


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{_DIGITS}g}")
    return x


def build_report(command: str, config: dict, checks: list[CheckResult], data: dict | None = None) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "status": "pass" if all(c.passed for c in checks) else "fail",
        "checks": [c.as_dict() for c in checks],
    }
    if data:
        rep["data"] = data
    return _clean(rep)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_text(report: dict) -> str:
    lines = [f"{report.get('command', '')}: {report.get('status', '').upper()}"]
    for c in report.get("checks", []):
        tol = c["tolerance"]
        lines.append(f"  {c['status'].upper():4s}  {c['id']:<44s} residual={c['worst_residual']}  tol={tol}")
    data = report.get("data")
    if data and not report.get("checks"):
        lines.append(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))
    return "\n".join(lines) + "\n"
