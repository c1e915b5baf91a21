"""Arc length, tangent angles, geodesic curvature and corner angles of curves.

The tangent angle of a curve is measured in a frame ``(X, Y)``:
``a = <gamma', X>``, ``b = <gamma', Y>`` and ``theta = atan2(b, a)``.  Its
rate ``theta' = (a b' - b a') / (a^2 + b^2)`` comes from exact jet
derivatives of the frame and metric along the curve, so geodesic curvature
carries no finite-difference error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import plane
from .curves import CurveError, CurveSegment, PiecewiseCurve
from .expr import Expr, evaluate_many
from .forms import OneForm, VectorField
from .geometry import Frame, MetricPatch, gram_schmidt_frame
from .quadrature import QuadratureInfo, gauss_legendre, integrate_interval
from .transport import RotationAngle

__all__ = [
    "ArcLengthCurve",
    "CornerAngles",
    "UnwrapError",
    "arc_length",
    "exterior_angles",
    "geodesic_curvature",
    "geodesic_curvature_integral",
    "tangent_angle_lift",
    "turning_angle",
]

CUSP_MARGIN = 1e-9
UNWRAP_START = 256
UNWRAP_MAX = 1 << 16
KG_TOL = 1e-12


class UnwrapError(RuntimeError):
    """The tangent angle could not be followed continuously."""


@dataclass(frozen=True)
class CornerAngles:
    """Signed exterior angles, positive when the curve turns left."""

    angles: tuple[float, ...]

    def __post_init__(self):
        for k, a in enumerate(self.angles):
            if not abs(a) < math.pi - CUSP_MARGIN:
                raise CurveError(f"corner {k} is a cusp (exterior angle {a:.17g})")

    @property
    def interior(self) -> tuple[float, ...]:
        return tuple(math.pi - a for a in self.angles)

    @property
    def total(self) -> float:
        return math.fsum(self.angles)

    def __len__(self) -> int:
        return len(self.angles)


def _lowered(m: MetricPatch, V: VectorField) -> tuple[Expr, Expr]:
    """Components of the covector ``<V, .>``."""
    return m.E * V.a + m.F * V.b, m.F * V.a + m.G * V.b


_LOWERED: dict[tuple[int, int], tuple] = {}


def _lowered_frame(m: MetricPatch, f: Frame) -> tuple[Expr, ...]:
    # keyed by identity: hashing whole expression trees is needlessly slow
    key = (id(m), id(f))
    hit = _LOWERED.get(key)
    if hit is None or hit[0] is not m or hit[1] is not f:
        if len(_LOWERED) > 64:
            _LOWERED.clear()
        hit = (m, f, (*_lowered(m, f.X), *_lowered(m, f.Y)))
        _LOWERED[key] = hit
    return hit[2]


def _euclid():
    m = plane().metric
    return m, gram_schmidt_frame(m, check=False)


def _frame_coords(seg: CurveSegment, m: MetricPatch, f: Frame, s, rates: bool = True):
    """``a, b`` (and ``a', b'``) of the velocity in the frame at parameters ``s``."""
    pos, vel, acc = seg.derivatives(s, 2)
    jets = evaluate_many(_lowered_frame(m, f), {"u": pos[0], "v": pos[1]}, order=1 if rates else 0)
    out = []
    for jx, jy in ((jets[0], jets[1]), (jets[2], jets[3])):
        comp = jx.value * vel[0] + jy.value * vel[1]
        if rates:
            gx, gy = jx.gradient(), jy.gradient()
            dx = gx[0] * vel[0] + gx[1] * vel[1]
            dy = gy[0] * vel[0] + gy[1] * vel[1]
            rate = dx * vel[0] + jx.value * acc[0] + dy * vel[1] + jy.value * acc[1]
            out.append((comp, rate))
        else:
            out.append((comp, None))
    (a, da), (b, db) = out
    return pos, vel, a, b, da, db


def _angle_rate(seg, m, f, s):
    pos, vel, a, b, da, db = _frame_coords(seg, m, f, s)
    return pos, vel, a, b, (a * db - b * da) / (a * a + b * b)


def _kg_integrand(seg, m, f, w):
    def g(s):
        pos, vel, a, b, rate = _angle_rate(seg, m, f, s)
        if w is None:
            return rate
        jp, jq = evaluate_many([w.p, w.q], {"u": pos[0], "v": pos[1]})
        return rate - (jp.value * vel[0] + jq.value * vel[1])

    return g


def _speed(seg: CurveSegment, m: MetricPatch, s) -> np.ndarray:
    pos, vel = seg.derivatives(s, 1)
    return np.sqrt(m.inner_at(pos[0], pos[1], vel, vel))


# --------------------------------------------------------------------------
# arc length


class ArcLengthCurve:
    """A curve reparametrised by metric arc length ``s`` in [0, L]."""

    PANELS = 64

    def __init__(self, curve: PiecewiseCurve, m: MetricPatch):
        self.curve = curve
        self.metric = m
        x, wts = gauss_legendre(16)
        self._x, self._w = x, wts
        edges = np.linspace(0.0, 1.0, self.PANELS + 1)
        self._edges = edges
        cums = []
        for seg in curve.segments:
            lo, hi = edges[:-1], edges[1:]
            nodes = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]
            sp = _speed(seg, m, nodes.ravel()).reshape(nodes.shape)
            panel = 0.5 * (hi - lo) * (sp @ wts)
            cums.append(np.concatenate([[0.0], np.cumsum(panel)]))
        self._cum = cums
        self.segment_lengths = np.array([c[-1] for c in cums])
        self._offsets = np.concatenate([[0.0], np.cumsum(self.segment_lengths)])
        self.length = float(self._offsets[-1])

    def _partial(self, i: int, tau: np.ndarray) -> np.ndarray:
        """Length of segment ``i`` over [0, tau]."""
        k = np.clip(np.searchsorted(self._edges, tau, side="right") - 1, 0, self.PANELS - 1)
        lo = self._edges[k]
        half = 0.5 * (tau - lo)
        nodes = (lo + half)[:, None] + half[:, None] * self._x[None, :]
        sp = _speed(self.curve.segments[i], self.metric, nodes.ravel()).reshape(nodes.shape)
        return self._cum[i][k] + half * (sp @ self._w)

    def parameter(self, s) -> np.ndarray:
        """Global curve parameter ``T`` at arc lengths ``s`` (Newton on the length)."""
        s = np.atleast_1d(np.asarray(s, float))
        if np.any((s < -1e-12) | (s > self.length * (1 + 1e-12) + 1e-12)):
            raise CurveError(f"arc length outside [0, {self.length}]")
        idx = np.clip(np.searchsorted(self._offsets, s, side="right") - 1, 0, len(self.segment_lengths) - 1)
        out = np.empty_like(s)
        for i in np.unique(idx):
            sel = idx == i
            target = s[sel] - self._offsets[i]
            seg = self.curve.segments[i]
            tau = np.clip(target / self.segment_lengths[i], 0.0, 1.0)
            for _ in range(50):
                step = (self._partial(i, tau) - target) / _speed(seg, self.metric, tau)
                tau = np.clip(tau - step, 0.0, 1.0)
                if np.max(np.abs(step)) < 1e-14:
                    break
            out[sel] = i + tau
        return out

    def point(self, s) -> np.ndarray:
        return self.curve.point(self.parameter(s))

    def velocity(self, s) -> np.ndarray:
        """``d gamma / ds`` in chart components; unit length in the metric."""
        T = self.parameter(s)
        pos, vel = self.curve.derivatives(T, 1)
        sp = np.sqrt(self.metric.inner_at(pos[0], pos[1], vel, vel))
        return vel / sp

    def speed(self, s) -> np.ndarray:
        T = self.parameter(s)
        pos, vel = self.curve.derivatives(T, 1)
        v = vel / np.sqrt(self.metric.inner_at(pos[0], pos[1], vel, vel))
        return np.sqrt(self.metric.inner_at(pos[0], pos[1], v, v))


def arc_length(c: PiecewiseCurve, m: MetricPatch, delta: float = 1e-3) -> tuple[float, ArcLengthCurve]:
    """Total metric length and the arc-length reparametrisation."""
    c.check_on(m, delta)
    s = np.linspace(0.0, 1.0, 256)
    for i, seg in enumerate(c.segments):
        if np.min(_speed(seg, m, s)) <= 1e-8:
            raise CurveError(f"segment {i} has vanishing metric speed")
    ac = ArcLengthCurve(c, m)
    return ac.length, ac


# --------------------------------------------------------------------------
# tangent angle and geodesic curvature


def tangent_angle_lift(
    c: PiecewiseCurve, m: MetricPatch | None = None, f: Frame | None = None, start: int = UNWRAP_START
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Continuous frame angle of the tangent, per segment, as (parameters, lift).

    Sampling starts at ``start`` points per segment and doubles until
    neighbouring samples differ by less than pi/2.  The exact angle rate
    bounds the step as well, so a fast-spinning tangent cannot alias into
    small wrapped jumps.
    """
    if m is None:
        m, f = _euclid()
    out = []
    for i, seg in enumerate(c.segments):
        n = start
        while True:
            s = np.linspace(0.0, 1.0, n)
            _, _, a, b, rate = _angle_rate(seg, m, f, s)
            ang = np.arctan2(b, a)
            jumps = np.abs(np.diff(ang))
            jumps = np.minimum(jumps, 2 * math.pi - jumps)
            step = np.max(np.abs(rate)) / (n - 1)
            if np.max(jumps, initial=0.0) < math.pi / 2 and step < math.pi / 4:
                break
            n = 2 * n - 1
            if n > UNWRAP_MAX:
                raise UnwrapError(f"tangent angle of segment {i} cannot be unwrapped")
        out.append((i + s, np.unwrap(ang)))
    return out


def geodesic_curvature(
    c, m: MetricPatch, f: Frame, w: OneForm, s
) -> np.ndarray:
    """``k_g = d theta/ds - omega(d gamma/ds)``.

    ``c`` is an :class:`ArcLengthCurve` (``s`` is arc length) or a plain
    curve (``s`` is its parameter; the rate is divided by the metric speed).
    """
    if isinstance(c, ArcLengthCurve):
        T = c.parameter(s)
        curve = c.curve
    else:
        T = np.atleast_1d(np.asarray(s, float))
        curve = c
    tangent_angle_lift(curve, m, f)  # raises on unwrap failure
    idx, tau = curve.locate(T)
    out = np.empty_like(tau)
    for i in np.unique(idx):
        sel = idx == i
        seg = curve.segments[i]
        out[sel] = _kg_integrand(seg, m, f, w)(tau[sel]) / _speed(seg, m, tau[sel])
    return out


def geodesic_curvature_integral(
    c: PiecewiseCurve, m: MetricPatch, f: Frame, w: OneForm | None, tol: float = KG_TOL
) -> tuple[float, QuadratureInfo]:
    """``int k_g ds`` over the smooth pieces (``w=None`` gives the bare turning)."""
    tangent_angle_lift(c, m, f)
    total, info = 0.0, QuadratureInfo()
    for seg in c.segments:
        val, inf = integrate_interval(_kg_integrand(seg, m, f, w), 0.0, 1.0, tol / c.n_segments)
        total += val
        info = info.merge(inf)
    return total, info


def _end_tangent(seg: CurveSegment, m, f, s: float) -> tuple[float, float]:
    _, _, a, b, _, _ = _frame_coords(seg, m, f, np.array([s]), rates=False)
    return float(a[0]), float(b[0])


def exterior_angles(c: PiecewiseCurve, m: MetricPatch | None = None, f: Frame | None = None) -> CornerAngles:
    """Signed angle from the incoming to the outgoing tangent at every junction."""
    if m is None:
        m, f = _euclid()
    elif f is None:
        f = gram_schmidt_frame(m)
    angles = []
    for i, j in c.junctions():
        a1, b1 = _end_tangent(c.segments[i], m, f, 1.0)
        a2, b2 = _end_tangent(c.segments[j], m, f, 0.0)
        angles.append(math.atan2(a1 * b2 - b1 * a2, a1 * a2 + b1 * b2))
    return CornerAngles(tuple(angles))


def turning_angle(c: PiecewiseCurve, tol: float = KG_TOL) -> RotationAngle:
    """Total tangent turning of a closed plane curve, corners included."""
    if not c.closed:
        raise CurveError("turning angle needs a closed curve")
    m, f = _euclid()
    smooth, _ = geodesic_curvature_integral(c, m, f, None, tol)
    return RotationAngle(smooth + exterior_angles(c, m, f).total)


def smooth_turning(c: PiecewiseCurve, tol: float = KG_TOL) -> tuple[float, QuadratureInfo]:
    m, f = _euclid()
    return geodesic_curvature_integral(c, m, f, None, tol)
