"""Verification reports and their JSON / CSV serialisation.

Floats are written with 17 significant digits so a report round-trips
exactly; the field set is fixed (see docs/report-schema.md).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .quadrature import QuadratureInfo
from .transport import mod_2pi_distance

__all__ = ["CSV_FIELDS", "VerificationReport", "fmt", "reports_to_csv", "reports_to_json"]

CSV_FIELDS = (
    "scenario",
    "theorem",
    "lhs",
    "rhs",
    "residual",
    "residual_kind",
    "tolerance",
    "passed",
    "panels",
    "max_depth",
    "evaluations",
    "converged",
    "terms",
)


def fmt(x: float) -> str:
    """A float with 17 significant digits (``null`` for non-finite values in JSON)."""
    x = float(x) + 0.0  # folds -0.0 into 0.0
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    theorem: str
    lhs: float
    rhs: float
    residual: float
    residual_kind: str
    tolerance: float
    passed: bool
    quadrature: QuadratureInfo = field(default_factory=QuadratureInfo)
    terms: dict = field(default_factory=dict)

    @classmethod
    def build(cls, scenario, theorem, lhs, rhs, tol, info=None, mod_2pi=False, terms=None):
        lhs, rhs = float(lhs), float(rhs)
        if mod_2pi:
            residual, kind = mod_2pi_distance(lhs - rhs), "mod_2pi"
        else:
            residual, kind = abs(lhs - rhs), "lift"
        return cls(
            scenario,
            theorem,
            lhs,
            rhs,
            residual,
            kind,
            float(tol),
            bool(residual < tol),
            info or QuadratureInfo(),
            {k: float(v) for k, v in (terms or {}).items()},
        )

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "theorem": self.theorem,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "residual_kind": self.residual_kind,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "quadrature": self.quadrature.as_dict(),
            "terms": dict(self.terms),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return _dump(self.as_dict(), indent, 0)


def _dump(obj, indent, level) -> str:
    """JSON with floats at 17 significant digits; key order is preserved."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_dump(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def reports_to_json(reports, indent: int | None = 2) -> str:
    return _dump([r.as_dict() for r in reports], indent, 0) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in reports:
        q = r.quadrature
        writer.writerow([
            r.scenario,
            r.theorem,
            fmt(r.lhs),
            fmt(r.rhs),
            fmt(r.residual),
            r.residual_kind,
            fmt(r.tolerance),
            "true" if r.passed else "false",
            q.panels,
            q.max_depth,
            q.evaluations,
            "true" if q.converged else "false",
            ";".join(f"{k}={fmt(v)}" for k, v in r.terms.items()),
        ])
    return buf.getvalue()
