"""Curvature integrals over chart regions and the theorem-level checks.

Every ``verify_*`` function returns a :class:`~curvatura.report.VerificationReport`.
Gauss-Bonnet style reports compare continuous lifts directly; holonomy
reports compare angles modulo 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boundary import exterior_angles, geodesic_curvature_integral, smooth_turning
from .catalog import Surface
from .connection import connection_form
from .curves import CurveError, PiecewiseCurve
from .expr import Expr, evaluate_many
from .forms import OneForm
from .geometry import Frame, MetricPatch, gram_schmidt_frame
from .quadrature import (
    MAX_DEPTH_1D,
    MAX_DEPTH_2D,
    QuadratureInfo,
    gauss_legendre,
    integrate_interval,
    integrate_rectangle,
)
from .report import VerificationReport
from .transport import holonomy

__all__ = [
    "DomainSpec",
    "Triangulation",
    "TriangulationError",
    "euler_characteristic",
    "integrate_curvature",
    "verify_compact",
    "verify_excess",
    "verify_general",
    "verify_holonomy",
    "verify_local",
    "verify_turning",
]

TWO_PI = 2 * math.pi
CONTAINS_BLOCK = 1 << 22  # sampled edges x points per vectorised block


def quad_tol(tol: float) -> float:
    """Quadrature tolerance used for a report tolerance ``tol``."""
    return max(tol * 1e-3, 1e-13)


# --------------------------------------------------------------------------
# Euler characteristic


class TriangulationError(ValueError):
    pass


@dataclass(frozen=True)
class Triangulation:
    """Counts or explicit lists of vertices, edges (pairs) and faces (triples)."""

    vertices: int | Sequence
    edges: int | Sequence
    faces: int | Sequence

    @staticmethod
    def _count(x) -> int:
        n = x if isinstance(x, int) else len(x)
        if n < 0:
            raise TriangulationError("counts must be non-negative")
        return n

    @property
    def counts(self) -> tuple[int, int, int]:
        return self._count(self.vertices), self._count(self.edges), self._count(self.faces)

    def validate(self) -> None:
        """Check the incidence data when lists are given."""
        self.counts
        if isinstance(self.edges, int) or isinstance(self.faces, int):
            return
        verts = set(range(self.vertices)) if isinstance(self.vertices, int) else set(self.vertices)
        edges = set()
        for e in self.edges:
            a, b = e
            if a == b or a not in verts or b not in verts:
                raise TriangulationError(f"bad edge {e}")
            key = frozenset((a, b))
            if key in edges:
                raise TriangulationError(f"duplicate edge {e}")
            edges.add(key)
        use = dict.fromkeys(edges, 0)
        for face in self.faces:
            if len(face) != 3 or len(set(face)) != 3:
                raise TriangulationError(f"face {face} is not a 3-cycle")
            for i in range(3):
                key = frozenset((face[i], face[(i + 1) % 3]))
                if key not in use:
                    raise TriangulationError(f"face {face} uses a missing edge")
                use[key] += 1
                if use[key] > 2:
                    raise TriangulationError(f"edge {tuple(key)} bounds more than two faces")


def euler_characteristic(t: Triangulation) -> int:
    """``V - E + F``."""
    t.validate()
    v, e, f = t.counts
    return v - e + f


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class DomainSpec:
    """A chart region: the whole chart, a rectangle, or bounded by oriented loops.

    Loops keep the domain on their left.  ``orientation = -1`` on a rectangle
    (or reversed loops) integrates with the opposite orientation.
    """

    kind: str
    rect: tuple[float, float, float, float] | None = None
    loops: tuple[PiecewiseCurve, ...] = ()
    euler_char: int | None = None
    orientation: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("chart", "rect", "loops"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "loops":
            if not self.loops:
                raise ValueError("a loop-bounded domain needs at least one loop")
            for loop in self.loops:
                if not loop.closed:
                    raise CurveError("boundary loops must be closed")
        if self.kind == "rect" and self.rect is None:
            raise ValueError("rect domain needs its bounds")

    @classmethod
    def full_chart(cls, euler_char: int | None = None, name: str = "") -> "DomainSpec":
        return cls("chart", euler_char=euler_char, name=name)

    @classmethod
    def rectangle(cls, u0, u1, v0, v1, euler_char: int | None = 1, name: str = "") -> "DomainSpec":
        return cls("rect", rect=(float(u0), float(u1), float(v0), float(v1)), euler_char=euler_char, name=name)

    @classmethod
    def bounded_by(cls, loops, euler_char: int | None = None, name: str = "") -> "DomainSpec":
        loops = (loops,) if isinstance(loops, PiecewiseCurve) else tuple(loops)
        return cls("loops", loops=loops, euler_char=euler_char, name=name)

    def reversed(self) -> "DomainSpec":
        if self.kind == "loops":
            return DomainSpec("loops", loops=tuple(c.reversed() for c in self.loops),
                              euler_char=self.euler_char, orientation=-self.orientation, name=self.name)
        return DomainSpec(self.kind, self.rect, (), self.euler_char, -self.orientation, self.name)

    def contains(self, u, v, samples: int = 2048) -> np.ndarray:
        """Even-odd test with a ray in the +u direction against sampled loops.

        Loops that wrap a periodic v axis count as boundaries of the region on
        their small-u side, matching :func:`integrate_curvature`.
        """
        u, v = np.atleast_1d(np.asarray(u, float)), np.atleast_1d(np.asarray(v, float))
        if self.kind != "loops":
            if self.kind == "rect":
                u0, u1, v0, v1 = self.rect
                return (u >= u0) & (u <= u1) & (v >= v0) & (v <= v1)
            return np.ones(u.shape, bool)
        inside = np.zeros(u.shape, bool)
        for loop in self.loops:
            pts = loop.samples(samples)
            ua, va = pts[0, :-1, None], pts[1, :-1, None]
            ub, vb = pts[0, 1:, None], pts[1, 1:, None]
            step = max(1, CONTAINS_BLOCK // ua.shape[0])
            for k in range(0, u.size, step):
                pu, pv = u[k:k + step], v[k:k + step]
                cross = (va > pv) != (vb > pv)
                with np.errstate(divide="ignore", invalid="ignore"):
                    uc = ua + (pv - va) * (ub - ua) / (vb - va)
                hits = np.count_nonzero(cross & (uc > pu), axis=0)
                inside[k:k + step] ^= hits % 2 == 1
        return inside


def _wraps(loop: PiecewiseCurve) -> bool:
    per = loop.periods[1]
    if not per:
        return False
    end, start = loop.point(loop.t_max).ravel(), loop.point(0.0).ravel()
    return abs(end[1] - start[1]) > 0.5 * per


class _Antiderivative:
    """``F(u, v) = int_{u_ref}^u c(s, v) ds`` by composite Gauss-Legendre."""

    def __init__(self, c: Expr, u_ref: float, panels: int = 2):
        self.c, self.u_ref, self.panels = c, float(u_ref), panels

    def __call__(self, u, v, panels: int | None = None) -> np.ndarray:
        P = panels or self.panels
        x, w = gauss_legendre(16)
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        frac = (np.arange(P)[:, None] + 0.5 * (x[None, :] + 1.0)) / P  # (P, 16) in [0, 1]
        span = u - self.u_ref
        S = self.u_ref + span[:, None] * frac.ravel()[None, :]
        V = np.broadcast_to(v[:, None], S.shape)
        vals = evaluate_many([self.c], {"u": S.ravel(), "v": V.ravel()})[0].value.reshape(S.shape)
        weights = np.tile(w, P) / (2 * P)
        return span * (vals @ weights)

    def tune(self, u, v, tol: float, max_panels: int = 256) -> None:
        """Double the panel count until samples agree to ``tol``."""
        P = self.panels
        prev = self(u, v, P)
        while P < max_panels:
            nxt = self(u, v, 2 * P)
            P *= 2
            if np.max(np.abs(nxt - prev)) <= tol:
                break
            prev = nxt
        self.panels = P


def _loop_integral(c: Expr, loops, u_ref: float, tol: float, max_depth: int, strict: bool):
    """``sum of oint F dv`` over the loops (Green's theorem)."""
    F = _Antiderivative(c, u_ref)
    samples = np.concatenate([lp.samples(64) for lp in loops], axis=1)
    F.tune(samples[0], samples[1], tol * 1e-2)
    total, info = 0.0, QuadratureInfo()
    nseg = sum(lp.n_segments for lp in loops)
    for loop in loops:
        for seg in loop.segments:
            def integrand(s, seg=seg):
                pos, vel = seg.derivatives(s, 1)
                return F(pos[0], pos[1]) * vel[1]

            val, inf = integrate_interval(integrand, 0.0, 1.0, tol / nseg, max_depth=max_depth, strict=strict)
            total += val
            info = info.merge(inf)
    return total, info


def integrate_curvature(
    m: MetricPatch,
    f: Frame | None,
    w: OneForm | None,
    d: DomainSpec,
    tol: float = 1e-10,
    max_depth: int | None = None,
    strict: bool = True,
) -> tuple[float, QuadratureInfo]:
    """``iint_D Omega`` with ``Omega = d omega = c du^dv``.

    Rectangles use adaptive tensor Gauss-Legendre.  Loop-bounded regions use
    Green's theorem, ``iint c du dv = oint F dv`` with ``F`` the u-antiderivative
    of ``c``, which keeps the integrand smooth up to the boundary.
    """
    if w is None:
        f = f if f is not None else gram_schmidt_frame(m)
        w = connection_form(m, f)
    c = w.d().c
    if d.kind in ("chart", "rect"):
        ch = m.chart
        rect = d.rect if d.kind == "rect" else (ch.u_min, ch.u_max, ch.v_min, ch.v_max)

        def integrand(u, v):
            return evaluate_many([c], {"u": u, "v": v})[0].value

        val, info = integrate_rectangle(
            integrand, rect, tol, max_depth=max_depth or MAX_DEPTH_2D, strict=strict
        )
        return d.orientation * val, info
    for lp in d.loops:
        lp.check_on(m)
    if any(_wraps(lp) for lp in d.loops):
        u_ref = m.chart.u_min
    else:
        u_ref = float(min(np.min(lp.samples(64)[0]) for lp in d.loops))
    return _loop_integral(c, d.loops, u_ref, tol, max_depth or MAX_DEPTH_1D, strict)


# --------------------------------------------------------------------------
# theorem checks


def _setup(m, f, w):
    f = f if f is not None else gram_schmidt_frame(m)
    w = w if w is not None else connection_form(m, f)
    return f, w


def verify_compact(
    surface: Surface, tol: float = 1e-6, name: str | None = None, max_depth: int | None = None
) -> VerificationReport:
    """``2 pi chi = iint K dA`` over the full chart of a closed catalog surface."""
    if surface.euler_char is None:
        raise ValueError(f"surface {surface.name!r} has no declared Euler characteristic")
    m = surface.metric
    f, w = _setup(m, None, None)
    total, info = integrate_curvature(
        m, f, w, DomainSpec.full_chart(), quad_tol(tol), max_depth, strict=max_depth is None
    )
    lhs = TWO_PI * surface.euler_char
    return VerificationReport.build(
        name or f"compact:{surface.name}",
        "compact",
        lhs,
        total,
        tol,
        info,
        terms={"curvature_integral": total, "euler_char": float(surface.euler_char)},
    )


def _boundary_terms(m, f, w, loops, tol, strict=True):
    kg_total, corner_total = 0.0, 0.0
    info = QuadratureInfo()
    for loop in loops:
        loop.check_on(m)
        kg, inf = geodesic_curvature_integral(loop, m, f, w, quad_tol(tol))
        kg_total += kg
        corner_total += exterior_angles(loop, m, f).total
        info = info.merge(inf)
    return kg_total, corner_total, info


def verify_local(
    m: MetricPatch,
    f: Frame | None,
    w: OneForm | None,
    d: DomainSpec,
    tol: float = 1e-6,
    name: str = "local",
    max_depth: int | None = None,
) -> VerificationReport:
    """``2 pi = iint Omega + int k_g ds + sum alpha`` for a disk-like domain."""
    if d.kind != "loops" or len(d.loops) != 1:
        raise ValueError("local Gauss-Bonnet needs a domain with exactly one boundary loop")
    f, w = _setup(m, f, w)
    area, qi = integrate_curvature(m, f, w, d, quad_tol(tol), max_depth, strict=max_depth is None)
    kg, corners, bi = _boundary_terms(m, f, w, d.loops, tol)
    rhs = area + kg + corners
    return VerificationReport.build(
        name, "local", TWO_PI, rhs, tol, qi.merge(bi),
        terms={"curvature_integral": area, "geodesic_curvature_integral": kg, "corner_sum": corners},
    )


def verify_general(
    m: MetricPatch,
    f: Frame | None,
    w: OneForm | None,
    d: DomainSpec,
    tol: float = 1e-6,
    name: str = "general",
    max_depth: int | None = None,
) -> VerificationReport:
    """``2 pi chi(D) = iint K dA + sum_l int k_g ds + sum_l sum_m alpha``."""
    if d.euler_char is None:
        raise ValueError("general Gauss-Bonnet needs a declared Euler characteristic")
    f, w = _setup(m, f, w)
    area, qi = integrate_curvature(m, f, w, d, quad_tol(tol), max_depth, strict=max_depth is None)
    kg, corners, bi = _boundary_terms(m, f, w, d.loops, tol)
    rhs = area + kg + corners
    return VerificationReport.build(
        name, "general", TWO_PI * d.euler_char, rhs, tol, qi.merge(bi),
        terms={
            "curvature_integral": area,
            "geodesic_curvature_integral": kg,
            "corner_sum": corners,
            "euler_char": float(d.euler_char),
            "loops": float(len(d.loops)),
        },
    )


def verify_excess(
    m: MetricPatch,
    f: Frame | None,
    w: OneForm | None,
    d: DomainSpec,
    tol: float = 1e-5,
    name: str = "excess",
    max_depth: int | None = None,
) -> VerificationReport:
    """Angle excess of a geodesic polygon: ``sum beta - (M - 2) pi = iint K dA``."""
    if d.kind != "loops" or len(d.loops) != 1:
        raise ValueError("angle excess needs a single boundary loop")
    f, w = _setup(m, f, w)
    loop = d.loops[0]
    corners = exterior_angles(loop, m, f)
    interior = math.fsum(corners.interior)
    lhs = interior - (len(corners) - 2) * math.pi
    area, qi = integrate_curvature(m, f, w, d, quad_tol(tol), max_depth, strict=max_depth is None)
    kg, _, bi = _boundary_terms(m, f, w, d.loops, tol)
    return VerificationReport.build(
        name, "excess", lhs, area, tol, qi.merge(bi),
        terms={"interior_angle_sum": interior, "curvature_integral": area, "geodesic_curvature_integral": kg},
    )


def verify_turning(c: PiecewiseCurve, tol: float = 1e-8, name: str = "turning") -> VerificationReport:
    """Total tangent turning of a simple closed plane curve is ``+-2 pi``.

    The sign follows the traversal direction (shoelace area).
    """
    if not c.closed:
        raise CurveError("turning needs a closed curve")
    smooth, info = smooth_turning(c, quad_tol(tol))
    corners = exterior_angles(c)
    sign = 1.0 if c.signed_area() > 0 else -1.0
    rhs = smooth + corners.total
    terms = {"smooth_turning": smooth, "corner_sum": corners.total}
    if len(corners):
        terms["interior_angle_sum"] = math.fsum(corners.interior)
    return VerificationReport.build(name, "turning", sign * TWO_PI, rhs, tol, info, terms=terms)


def verify_holonomy(
    m: MetricPatch,
    f: Frame | None,
    w: OneForm | None,
    loop: PiecewiseCurve,
    d: DomainSpec | None = None,
    tol: float = 1e-6,
    name: str = "holonomy",
    max_depth: int | None = None,
) -> VerificationReport:
    """Holonomy of ``loop`` against ``iint_D Omega`` modulo 2 pi (``D`` defaults to the loop's region)."""
    f, w = _setup(m, f, w)
    d = d if d is not None else DomainSpec.bounded_by(loop)
    loop.check_on(m)
    J = holonomy(w, loop, quad_tol(tol), singular=m.singular)
    area, qi = integrate_curvature(m, f, w, d, quad_tol(tol), max_depth, strict=max_depth is None)
    return VerificationReport.build(
        name, "holonomy", J.angle.lift, area, tol, qi.merge(J.info), mod_2pi=True,
        terms={"holonomy_wrapped": J.angle.wrapped, "curvature_integral": area},
    )

