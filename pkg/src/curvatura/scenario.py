"""Scenario descriptions: loading from TOML files and running them.

A scenario names a surface (catalog entry or inline expressions), an optional
frame seed, the curves or domain it needs and one theorem selector.  See
docs/scenario-format.md for the file grammar.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .catalog import SURFACES, Surface, get_surface
from .connection import connection_form, gauge_transform
from .curves import CurveSegment, PiecewiseCurve, parse_curve
from .expr import evaluate_many
from .forms import VectorField
from .geometry import Chart, Embedding, MetricPatch, SingularLocus, gram_schmidt_frame, induced_metric
from .report import VerificationReport, fmt
from .verify import (
    DomainSpec,
    integrate_curvature,
    quad_tol,
    verify_compact,
    verify_excess,
    verify_general,
    verify_holonomy,
    verify_local,
    verify_turning,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

__all__ = [
    "THEOREMS",
    "Scenario",
    "ScenarioError",
    "build_surface",
    "curvature_grid",
    "load_scenarios",
    "run_scenario",
]

THEOREMS = ("compact", "local", "general", "excess", "turning", "holonomy", "curvature-grid")

DEFAULT_TOL = {
    "compact": 1e-6,
    "local": 1e-6,
    "general": 1e-6,
    "excess": 1e-5,
    "turning": 1e-8,
    "holonomy": 1e-6,
    "curvature-grid": 1e-8,
}


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario description."""


@dataclass(frozen=True)
class Scenario:
    name: str
    theorem: str
    surface: str | None = None
    params: dict = field(default_factory=dict)
    metric: dict | None = None
    embedding: dict | None = None
    chart: dict | None = None
    singular: dict | None = None
    frame: dict | None = None
    gauge: str | None = None
    curve: str | None = None
    loops: tuple = ()
    euler_char: int | None = None
    tolerance: float | None = None
    max_depth: int | None = None
    grid: int = 32
    expected_k: float | None = None
    out: str | None = None
    curves: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ScenarioError(
                f"scenario {self.name!r}: unknown theorem {self.theorem!r} (choose from {', '.join(THEOREMS)})"
            )
        sources = [x is not None for x in (self.surface, self.metric, self.embedding)]
        if self.theorem != "turning" and sum(sources) != 1:
            raise ScenarioError(
                f"scenario {self.name!r}: give exactly one of surface, metric or embedding"
            )
        if self.surface is not None and self.surface not in SURFACES:
            raise ScenarioError(f"scenario {self.name!r}: unknown surface {self.surface!r}")
        if self.theorem == "turning" and not (self.curve or self.loops):
            raise ScenarioError(f"scenario {self.name!r}: turning needs a curve")
        if self.theorem in ("local", "general", "excess", "holonomy") and not self.loops:
            raise ScenarioError(f"scenario {self.name!r}: {self.theorem} needs boundary loops")
        if self.theorem == "general" and self.euler_char is None:
            raise ScenarioError(f"scenario {self.name!r}: general needs euler_char")
        for ref in self.loops + ((self.curve,) if self.curve else ()):
            self._resolve(ref)

    @property
    def tol(self) -> float:
        return float(self.tolerance if self.tolerance is not None else DEFAULT_TOL[self.theorem])

    def _resolve(self, ref: str) -> PiecewiseCurve:
        if ref in self.curves:
            return self.curves[ref]
        try:
            return parse_curve(ref)
        except ValueError as exc:
            raise ScenarioError(f"scenario {self.name!r}: curve {ref!r}: {exc}") from None

    def loop_curves(self) -> list[PiecewiseCurve]:
        return [self._resolve(r) for r in self.loops]


# --------------------------------------------------------------------------
# building blocks


def _chart(spec: dict | None) -> Chart:
    if spec is None:
        raise ScenarioError("inline metric or embedding needs a chart table")
    try:
        (u0, u1), (v0, v1) = spec["u"], spec["v"]
    except (KeyError, TypeError, ValueError):
        raise ScenarioError("chart needs u = [min, max] and v = [min, max]") from None
    return Chart(
        float(u0), float(u1), float(v0), float(v1),
        bool(spec.get("periodic_u", False)), bool(spec.get("periodic_v", False)),
    )


def _locus(spec: dict | None) -> SingularLocus:
    if not spec:
        return SingularLocus()
    return SingularLocus(
        tuple(float(x) for x in spec.get("u_lines", ())),
        tuple(float(x) for x in spec.get("v_lines", ())),
        tuple((float(a), float(b)) for a, b in spec.get("points", ())),
    )


def build_surface(sc: Scenario) -> tuple[MetricPatch, int | None]:
    """Metric and declared Euler characteristic of the scenario's surface."""
    if sc.surface is not None:
        s: Surface = get_surface(sc.surface, **sc.params)
        return s.metric, s.euler_char
    chart, locus = _chart(sc.chart), _locus(sc.singular)
    if sc.metric is not None:
        E, F, G = (sc.metric.get(k, "0") for k in "EFG")
        return MetricPatch(chart, E, F, G, locus), sc.euler_char
    x, y, z = (sc.embedding.get(k, "0") for k in "xyz")
    return induced_metric(Embedding(chart, x, y, z, locus)), sc.euler_char


def build_frame(sc: Scenario, m: MetricPatch):
    X1 = Y1 = None
    if sc.frame:
        try:
            X1 = VectorField(*sc.frame["X"])
            Y1 = VectorField(*sc.frame["Y"])
        except (KeyError, TypeError):
            raise ScenarioError(f"scenario {sc.name!r}: frame needs X = [a, b] and Y = [a, b]") from None
    f = gram_schmidt_frame(m, X1, Y1)
    w = connection_form(m, f)
    if sc.gauge:
        f, w = gauge_transform(m, f, sc.gauge, w)
    return f, w


def curvature_grid(m: MetricPatch, f, w, n: int) -> tuple[list[str], np.ndarray]:
    """Gauss curvature and connection coefficients on the cell centres of an n-by-n grid."""
    u, v = m.chart.probe_points(n)
    k = w.d()(f.X, f.Y)
    jets = evaluate_many([k, w.p, w.q, w.d().c], {"u": u, "v": v})
    cols = ["u", "v", "k", "omega_u", "omega_v", "omega_coeff"]
    return cols, np.column_stack([u, v] + [j.value for j in jets])


def grid_csv(cols, data) -> str:
    lines = [",".join(cols)]
    lines += [",".join(fmt(x) for x in row) for row in data]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# running


def run_scenario(sc: Scenario) -> VerificationReport:
    tol, depth = sc.tol, sc.max_depth
    if sc.theorem == "turning":
        return verify_turning(sc._resolve(sc.curve or sc.loops[0]), tol, sc.name)
    if sc.theorem == "compact" and sc.surface is not None and not (sc.frame or sc.gauge or sc.euler_char is not None):
        return verify_compact(get_surface(sc.surface, **sc.params), tol, sc.name, depth)
    m, chi = build_surface(sc)
    f, w = build_frame(sc, m)
    chi = sc.euler_char if sc.euler_char is not None else chi
    if sc.theorem == "compact":
        if chi is None:
            raise ScenarioError(f"scenario {sc.name!r}: compact needs euler_char")
        total, info = integrate_curvature(m, f, w, DomainSpec.full_chart(), quad_tol(tol), depth,
                                          strict=depth is None)
        return VerificationReport.build(
            sc.name, "compact", 2 * math.pi * chi, total, tol, info,
            terms={"curvature_integral": total, "euler_char": float(chi)},
        )
    if sc.theorem == "curvature-grid":
        cols, data = curvature_grid(m, f, w, sc.grid)
        if sc.out:
            Path(sc.out).write_text(grid_csv(cols, data))
        k = data[:, 2]
        ref = sc.expected_k if sc.expected_k is not None else float(np.mean(k))
        worst = float(k[int(np.argmax(np.abs(k - ref)))])
        return VerificationReport.build(
            sc.name, "curvature-grid", ref, worst, tol,
            terms={"k_min": float(k.min()), "k_max": float(k.max()), "points": float(k.size)},
        )
    loops = sc.loop_curves()
    if sc.theorem == "holonomy":
        return verify_holonomy(m, f, w, loops[0], None, tol, sc.name, depth)
    d = DomainSpec.bounded_by(loops, chi if sc.theorem == "general" else sc.euler_char)
    fn = {"local": verify_local, "general": verify_general, "excess": verify_excess}[sc.theorem]
    return fn(m, f, w, d, tol, sc.name, depth)


# --------------------------------------------------------------------------
# loading


_KEYS = {
    "name", "theorem", "surface", "params", "metric", "embedding", "chart", "singular",
    "frame", "gauge", "curve", "loops", "euler_char", "tolerance", "quadrature", "grid",
    "expected_k", "out",
}


def _curve_table(name: str, spec: Any) -> PiecewiseCurve:
    if isinstance(spec, str):
        return parse_curve(spec)
    if not isinstance(spec, dict):
        raise ScenarioError(f"curve {name!r} must be a string or a table")
    if "spec" in spec:
        c = parse_curve(spec["spec"])
        return c.reversed() if spec.get("reversed") else c
    segs = spec.get("segments")
    if not segs:
        raise ScenarioError(f"curve {name!r} needs 'spec' or 'segments'")
    pieces = [CurveSegment(str(a), str(b)) for a, b in segs]
    periods = tuple(float(x) for x in spec.get("periods", (0.0, 0.0)))
    if spec.get("closed", True):
        c = PiecewiseCurve(tuple(pieces), closed=True, name=name, periods=periods)
    else:
        c = PiecewiseCurve(tuple(pieces), name=name, periods=periods)
    return c.reversed() if spec.get("reversed") else c


def scenario_from_dict(d: dict, curves: dict | None = None, index: int = 0) -> Scenario:
    unknown = set(d) - _KEYS
    label = d.get("name", f"#{index + 1}")
    if unknown:
        raise ScenarioError(f"scenario {label!r}: unknown keys {sorted(unknown)}")
    if "theorem" not in d:
        raise ScenarioError(f"scenario {label!r}: missing theorem selector")
    quad = d.get("quadrature", {})
    loops = d.get("loops", ())
    if isinstance(loops, str):
        loops = (loops,)
    return Scenario(
        name=str(label),
        theorem=d["theorem"],
        surface=d.get("surface"),
        params={k: float(v) for k, v in d.get("params", {}).items()},
        metric=d.get("metric"),
        embedding=d.get("embedding"),
        chart=d.get("chart"),
        singular=d.get("singular"),
        frame=d.get("frame"),
        gauge=d.get("gauge"),
        curve=d.get("curve"),
        loops=tuple(loops),
        euler_char=d.get("euler_char"),
        tolerance=d.get("tolerance"),
        max_depth=quad.get("max_depth"),
        grid=int(d.get("grid", 32)),
        expected_k=d.get("expected_k"),
        out=d.get("out"),
        curves=dict(curves or {}),
    )


def load_scenarios(path) -> list[Scenario]:
    """Parse a scenario file; TOML syntax errors report line and column."""
    text = Path(path).read_text()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    curves = {name: _curve_table(name, spec) for name, spec in doc.get("curves", {}).items()}
    items = doc.get("scenario", [])
    if not items:
        raise ScenarioError(f"{path}: no [[scenario]] tables")
    return [scenario_from_dict(d, curves, i) for i, d in enumerate(items)]

