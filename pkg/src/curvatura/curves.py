"""Piecewise-smooth curves in a chart and the built-in curve constructors.

Each smooth piece is a pair of expressions in ``t`` on [0, 1].  A curve with
``n`` pieces is parametrised globally by ``T`` in [0, n]: piece ``i`` covers
``[i, i + 1]``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import Expr, Num, Var, as_expr, call, cos, evaluate_many, parse, sin, substitute

__all__ = [
    "CurveError",
    "CurveSegment",
    "PiecewiseCurve",
    "circle",
    "closed_curve",
    "ellipse",
    "great_circle_arc",
    "latitude",
    "parse_curve",
    "poincare_geodesic",
    "polygon",
    "segment",
]

JOIN_TOL = 1e-10
MIN_SPEED = 1e-8
SPEED_SAMPLES = 256

t = Var("t")


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class CurveSegment:
    """One smooth piece ``t -> (u(t), v(t))``, ``t`` in [0, 1]."""

    u: Expr
    v: Expr

    def __post_init__(self):
        for name in ("u", "v"):
            e = getattr(self, name)
            e = parse(e, ("t",)) if isinstance(e, str) else as_expr(e)
            if e.variables - {"t"}:
                raise CurveError(f"curve component {e} may only depend on t")
            object.__setattr__(self, name, e)

    def jets(self, s, order: int = 2):
        """Jets of u and v in t at parameters ``s`` (derivatives are d/dt)."""
        return evaluate_many([self.u, self.v], {"t": np.asarray(s, float)}, order)

    def derivatives(self, s, order: int = 2) -> list[np.ndarray]:
        """``[position, velocity, acceleration, ...]`` as (2, N) arrays."""
        ju, jv = self.jets(s, order)
        return [
            np.stack([ju.partial(k, 0), jv.partial(k, 0)]) for k in range(order + 1)
        ]

    def point(self, s) -> np.ndarray:
        return self.derivatives(s, 0)[0]

    def reversed(self) -> "CurveSegment":
        back = {"t": 1.0 - t}
        return CurveSegment(substitute(self.u, back), substitute(self.v, back))


@dataclass(frozen=True)
class PiecewiseCurve:
    segments: tuple[CurveSegment, ...]
    closed: bool = False
    orientation: int = 1
    name: str = field(default="", compare=False)
    # chart periods (0 = none); a closed curve may end one period from its start
    periods: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise CurveError("a curve needs at least one segment")
        object.__setattr__(self, "segments", segs)
        for i in range(len(segs) - 1):
            self._check_join(segs[i], segs[i + 1], f"segments {i} and {i + 1}")
        if self.closed:
            self._check_join(segs[-1], segs[0], "last and first segment", self.periods)
        s = np.linspace(0.0, 1.0, SPEED_SAMPLES)
        for i, seg in enumerate(segs):
            vel = seg.derivatives(s, 1)[1]
            speed = np.hypot(vel[0], vel[1])
            if np.min(speed) <= MIN_SPEED:
                raise CurveError(
                    f"segment {i} has vanishing velocity near t={s[int(np.argmin(speed))]:.4g}"
                )

    @staticmethod
    def _check_join(a: CurveSegment, b: CurveSegment, what: str, periods=(0.0, 0.0)):
        d = (a.point(1.0) - b.point(0.0)).ravel()
        for k, per in enumerate(periods):
            if per:
                d[k] = math.remainder(d[k], per)
        gap = np.max(np.abs(d))
        if gap > JOIN_TOL:
            raise CurveError(f"{what} do not meet (gap {gap:.3g})")

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def t_max(self) -> float:
        return float(len(self.segments))

    def locate(self, T) -> tuple[np.ndarray, np.ndarray]:
        """Segment index and local parameter for global parameters ``T``."""
        T = np.atleast_1d(np.asarray(T, float))
        if np.any((T < -1e-12) | (T > self.t_max + 1e-12)):
            raise CurveError(f"parameter outside [0, {self.t_max}]")
        idx = np.clip(np.floor(T).astype(int), 0, self.n_segments - 1)
        return idx, T - idx

    def derivatives(self, T, order: int = 1) -> list[np.ndarray]:
        idx, s = self.locate(T)
        out = [np.empty((2, s.size)) for _ in range(order + 1)]
        for i in np.unique(idx):
            sel = idx == i
            parts = self.segments[i].derivatives(s[sel], order)
            for k in range(order + 1):
                out[k][:, sel] = parts[k]
        return out

    def point(self, T) -> np.ndarray:
        return self.derivatives(T, 0)[0]

    def velocity(self, T) -> np.ndarray:
        return self.derivatives(T, 1)[1]

    def samples(self, per_segment: int = SPEED_SAMPLES) -> np.ndarray:
        s = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([seg.point(s) for seg in self.segments], axis=1)

    def reversed(self) -> "PiecewiseCurve":
        segs = tuple(seg.reversed() for seg in reversed(self.segments))
        return PiecewiseCurve(segs, self.closed, -self.orientation, self.name, self.periods)

    def junctions(self) -> list[tuple[int, int]]:
        """Pairs (incoming segment, outgoing segment) at every corner candidate."""
        pairs = [(i, i + 1) for i in range(self.n_segments - 1)]
        if self.closed:
            pairs.append((self.n_segments - 1, 0))
        return pairs

    def signed_area(self) -> float:
        """Shoelace area enclosed in chart coordinates (positive if counter-clockwise)."""
        total = 0.0
        from .quadrature import integrate_interval

        for seg in self.segments:
            def integrand(s, seg=seg):
                p, dp = seg.derivatives(s, 1)
                return 0.5 * (p[0] * dp[1] - p[1] * dp[0])

            val, _ = integrate_interval(integrand, 0.0, 1.0, 1e-12)
            total += val
        return total

    def check_locus(self, singular, delta: float) -> None:
        pts = self.samples()
        singular.check_path(pts[0], pts[1], delta, what=self.name or "curve")

    def check_on(self, m, delta: float = 1e-3) -> None:
        """Stay inside the chart of metric ``m`` and away from its singular locus."""
        pts = self.samples()
        m.chart.check_path(pts[0], pts[1], what=self.name or "curve")
        if m.singular:
            m.singular.check_path(pts[0], pts[1], delta, what=self.name or "curve")


def segment(u, v) -> CurveSegment:
    return CurveSegment(u, v)


def _closed(segs, name, periods=(0.0, 0.0)) -> PiecewiseCurve:
    return PiecewiseCurve(tuple(segs), closed=True, name=name, periods=periods)


def circle(cx: float, cy: float, r: float, clockwise: bool = False) -> PiecewiseCurve:
    s = -1.0 if clockwise else 1.0
    ang = s * 2 * math.pi * t
    seg = CurveSegment(cx + r * cos(ang), cy + r * sin(ang))
    return _closed([seg], f"circle({cx:g},{cy:g},{r:g})")


def ellipse(a: float, b: float, cx: float = 0.0, cy: float = 0.0) -> PiecewiseCurve:
    ang = 2 * math.pi * t
    return _closed([CurveSegment(cx + a * cos(ang), cy + b * sin(ang))], f"ellipse({a:g},{b:g})")


def latitude(theta0: float, reverse: bool = False) -> PiecewiseCurve:
    """``theta = theta0`` on the (theta, phi) sphere chart, phi increasing.

    The loop closes through the periodic phi axis.
    """
    phi = 2 * math.pi * (1.0 - t) if reverse else 2 * math.pi * t
    return _closed(
        [CurveSegment(Num(float(theta0)), phi)],
        f"latitude({theta0:.17g})",
        periods=(0.0, 2 * math.pi),
    )


def polygon(vertices: Sequence[tuple[float, float]]) -> PiecewiseCurve:
    pts = [tuple(map(float, p)) for p in vertices]
    if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 3:
        raise CurveError("a polygon needs at least three vertices")
    segs = []
    for (u0, v0), (u1, v1) in zip(pts, pts[1:] + pts[:1]):
        segs.append(CurveSegment(u0 + (u1 - u0) * t, v0 + (v1 - v0) * t))
    return _closed(segs, f"polygon[{len(pts)}]")


def _unit(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def great_circle_arc(p: tuple[float, float], q: tuple[float, float]) -> CurveSegment:
    """Shorter great-circle arc between two (theta, phi) points of the unit sphere.

    The chart angle ``phi`` is followed continuously from ``p``; arcs that
    cross the chart seam ``phi = 0`` are rejected.
    """
    a, b = _unit(*p), _unit(*q)
    ang = math.acos(max(-1.0, min(1.0, float(a @ b))))
    if ang < 1e-12 or abs(ang - math.pi) < 1e-12:
        raise CurveError("great-circle arc needs distinct, non-antipodal endpoints")
    n = b - (a @ b) * a
    n = n / np.linalg.norm(n)
    c, s = cos(ang * t), sin(ang * t)
    x, y, z = (float(a[k]) * c + float(n[k]) * s for k in range(3))
    theta = call("acos", z)
    # measure phi relative to p so the atan2 cut sits opposite the start
    c0, s0 = math.cos(p[1]), math.sin(p[1])
    phi = call("atan2", c0 * y - s0 * x, c0 * x + s0 * y) + float(p[1])
    seg = CurveSegment(theta, phi)
    end = seg.point(1.0).ravel()
    if abs(end[1] - q[1]) > 1e-9 or abs(end[0] - q[0]) > 1e-9:
        raise CurveError("great-circle arc crosses the chart seam phi = 0")
    return seg


def poincare_geodesic(p: tuple[float, float], q: tuple[float, float]) -> CurveSegment:
    """Hyperbolic geodesic between two points of the Poincare disk.

    It is the diameter segment when p, q and the origin are collinear,
    otherwise the arc of the circle through p and q orthogonal to the unit
    circle.
    """
    p_ = np.array(p, float)
    q_ = np.array(q, float)
    cross = p_[0] * q_[1] - p_[1] * q_[0]
    if abs(cross) < 1e-14:
        return CurveSegment(p_[0] + (q_[0] - p_[0]) * t, p_[1] + (q_[1] - p_[1]) * t)
    # centre c satisfies |c|^2 = 1 + R^2 and |c - p| = |c - q| = R
    #   2 c.p = |p|^2 + 1,  2 c.q = |q|^2 + 1
    A = 2 * np.array([p_, q_])
    rhs = np.array([p_ @ p_ + 1.0, q_ @ q_ + 1.0])
    c = np.linalg.solve(A, rhs)
    R = math.sqrt(c @ c - 1.0)
    a0 = math.atan2(p_[1] - c[1], p_[0] - c[0])
    a1 = math.atan2(q_[1] - c[1], q_[0] - c[0])
    # short way round the circle (the arc inside the disk)
    d = (a1 - a0 + math.pi) % (2 * math.pi) - math.pi
    ang = a0 + d * t
    return CurveSegment(float(c[0]) + R * cos(ang), float(c[1]) + R * sin(ang))


def closed_curve(segments: Sequence[CurveSegment], name: str = "") -> PiecewiseCurve:
    return _closed(segments, name)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PAIR = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)")


def _numbers(text: str) -> list[float]:
    return [float(x) for x in re.findall(_NUM, text)]


def _pairs(text: str) -> list[tuple[float, float]]:
    pairs = [(float(a), float(b)) for a, b in _PAIR.findall(text)]
    if not pairs:
        raise CurveError(f"expected a list of (u, v) pairs, got {text!r}")
    return pairs


def parse_curve(spec: str) -> PiecewiseCurve:
    """Build a curve from ``kind:args``.

    Kinds: ``circle:cx,cy,r``, ``ellipse:a,b``, ``latitude:theta0``,
    ``polygon:(u,v),(u,v),...``, ``great_triangle:(th,ph),(th,ph),(th,ph)``,
    ``hyperbolic_triangle:(u,v),(u,v),(u,v)``.  A leading ``reversed:``
    traverses the curve backwards.
    """
    spec = spec.strip()
    if spec.startswith("reversed:"):
        return parse_curve(spec[len("reversed:"):]).reversed()
    kind, _, args = spec.partition(":")
    kind = kind.strip()
    if kind == "circle":
        nums = _numbers(args)
        if len(nums) != 3:
            raise CurveError("circle takes cx,cy,r")
        return circle(*nums)
    if kind == "ellipse":
        nums = _numbers(args)
        if len(nums) not in (2, 4):
            raise CurveError("ellipse takes a,b[,cx,cy]")
        return ellipse(*nums)
    if kind == "latitude":
        nums = _numbers(args)
        if len(nums) != 1:
            raise CurveError("latitude takes theta0")
        return latitude(nums[0])
    if kind == "polygon":
        return polygon(_pairs(args))
    if kind == "great_triangle":
        pts = _pairs(args)
        if len(pts) != 3:
            raise CurveError("great_triangle takes three (theta, phi) vertices")
        return closed_curve(
            [great_circle_arc(a, b) for a, b in zip(pts, pts[1:] + pts[:1])],
            "great_triangle",
        )
    if kind == "hyperbolic_triangle":
        pts = _pairs(args)
        if len(pts) != 3:
            raise CurveError("hyperbolic_triangle takes three (u, v) vertices")
        return closed_curve(
            [poincare_geodesic(a, b) for a, b in zip(pts, pts[1:] + pts[:1])],
            "hyperbolic_triangle",
        )
    raise CurveError(f"unknown curve kind {kind!r}")
