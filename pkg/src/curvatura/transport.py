"""Parallel transport, holonomy and the curvature operator.

In an orthonormal frame a parallel vector keeps constant length and its frame
angle ``phi`` obeys ``phi' = omega(gamma')``; transport along a curve is the
rotation by ``theta = int omega(gamma')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .curves import CurveError, CurveSegment, PiecewiseCurve, t as _t
from .expr import evaluate_many
from .forms import OneForm, VectorField
from .geometry import Frame, MetricPatch, SingularLocus, inner
from .quadrature import QuadratureInfo, integrate_interval

__all__ = [
    "RotationAngle",
    "TransportMap",
    "bracket_at",
    "compose",
    "covariant_derivative",
    "curvature_operator",
    "flow_commutator",
    "holonomy",
    "holonomy_defect_quotient",
    "inverse",
    "lie_bracket",
    "mod_2pi_distance",
    "second_covariant_commutator",
    "transport_angle",
]

TWO_PI = 2 * math.pi
TRANSPORT_TOL = 1e-12
CLOSURE_TOL = 1e-10


def mod_2pi_distance(x: float) -> float:
    """Distance from ``x`` to the nearest multiple of 2 pi."""
    r = math.remainder(float(x), TWO_PI)
    return abs(r)


@dataclass(frozen=True)
class RotationAngle:
    lift: float

    @property
    def wrapped(self) -> float:
        """Representative in [0, 2 pi)."""
        r = self.lift % TWO_PI
        return 0.0 if r == TWO_PI else r

    def distance(self, other) -> float:
        """Mod-2pi distance to another angle (or plain number)."""
        other = other.lift if isinstance(other, RotationAngle) else float(other)
        return mod_2pi_distance(self.lift - other)

    def __add__(self, other: "RotationAngle") -> "RotationAngle":
        return RotationAngle(self.lift + other.lift)

    def __neg__(self) -> "RotationAngle":
        return RotationAngle(-self.lift)

    def __float__(self) -> float:
        return float(self.lift)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class TransportMap:
    """Rotation of frame coordinates by ``angle``."""

    angle: RotationAngle
    info: QuadratureInfo | None = None

    @property
    def matrix(self) -> np.ndarray:
        return _rotation(self.angle.lift)

    def __call__(self, z) -> np.ndarray:
        return self.matrix @ np.asarray(z, float)

    @classmethod
    def identity(cls) -> "TransportMap":
        return cls(RotationAngle(0.0))


def compose(j1: TransportMap, j2: TransportMap) -> TransportMap:
    """``j1 o j2``; rotations of the plane commute so angles simply add."""
    return TransportMap(j1.angle + j2.angle)


def inverse(j: TransportMap) -> TransportMap:
    return TransportMap(-j.angle)


def _omega_along(w: OneForm, seg: CurveSegment):
    def integrand(s):
        pos, vel = seg.derivatives(s, 1)
        jp, jq = evaluate_many([w.p, w.q], {"u": pos[0], "v": pos[1]})
        return jp.value * vel[0] + jq.value * vel[1]

    return integrand


def transport_angle(
    w: OneForm,
    c: PiecewiseCurve,
    t: float = 0.0,
    t2: float | None = None,
    tol: float = TRANSPORT_TOL,
    singular: SingularLocus | None = None,
    delta: float = 1e-3,
    with_info: bool = False,
):
    """``theta = int_t^t2 omega(gamma'(s)) ds`` along the curve (global parameter).

    The interval is split at segment boundaries and each piece integrated by
    adaptive Gauss-Legendre with tolerance ``tol / n_segments``.
    """
    t2 = c.t_max if t2 is None else float(t2)
    t = float(t)
    for x in (t, t2):
        if not -1e-12 <= x <= c.t_max + 1e-12:
            raise CurveError(f"parameter {x} outside [0, {c.t_max}]")
    if singular:
        c.check_locus(singular, delta)
    info = QuadratureInfo()
    sign = 1.0
    lo, hi = t, t2
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    total = 0.0
    share = tol / c.n_segments
    for i, seg in enumerate(c.segments):
        a, b = max(lo, i), min(hi, i + 1)
        if b <= a:
            continue
        val, inf = integrate_interval(_omega_along(w, seg), a - i, b - i, share)
        total += val
        info = info.merge(inf)
    angle = RotationAngle(sign * total)
    return (angle, info) if with_info else angle


def holonomy(w: OneForm, loop: PiecewiseCurve, tol: float = TRANSPORT_TOL, **kw) -> TransportMap:
    """Transport once around a closed loop."""
    d = (loop.point(loop.t_max) - loop.point(0.0)).ravel()
    for k, per in enumerate(loop.periods):
        if per:
            d[k] = math.remainder(d[k], per)
    gap = float(np.max(np.abs(d)))
    if not loop.closed or gap > CLOSURE_TOL:
        raise CurveError(f"holonomy needs a closed loop (endpoint gap {gap:.3g})")
    angle, info = transport_angle(w, loop, 0.0, loop.t_max, tol, with_info=True, **kw)
    return TransportMap(angle, info)


# --------------------------------------------------------------------------
# covariant derivative, bracket, curvature operator


def covariant_derivative(
    m: MetricPatch, f: Frame, w: OneForm, Z: VectorField, W: VectorField
) -> VectorField:
    """``nabla_Z W`` through frame components ``W = aX + bY``.

    With ``nabla_Z X = -omega(Z) Y`` and ``nabla_Z Y = omega(Z) X`` the
    Leibniz rule gives ``(Z(a) + b omega(Z)) X + (Z(b) - a omega(Z)) Y``.
    """
    a = inner(m, W, f.X)
    b = inner(m, W, f.Y)
    wz = w(Z)
    return f.X * (Z.apply(a) + b * wz) + f.Y * (Z.apply(b) - a * wz)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y] = (X(C) - Y(A)) d/du + (X(D) - Y(B)) d/dv``."""
    return VectorField(X.apply(Y.a) - Y.apply(X.a), X.apply(Y.b) - Y.apply(X.b))


def curvature_operator(
    m: MetricPatch, f: Frame, w: OneForm, X: VectorField, Y: VectorField, Z: VectorField
) -> VectorField:
    """``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``."""
    nabla = lambda A, B: covariant_derivative(m, f, w, A, B)  # noqa: E731
    return nabla(X, nabla(Y, Z)) - nabla(Y, nabla(X, Z)) - nabla(lie_bracket(X, Y), Z)


def second_covariant_commutator(
    m: MetricPatch, f: Frame, w: OneForm, Z: VectorField
) -> VectorField:
    """``nabla_du nabla_dv Z - nabla_dv nabla_du Z`` (the coordinate fields commute)."""
    du, dv = VectorField.coordinate("u"), VectorField.coordinate("v")
    nabla = lambda A, B: covariant_derivative(m, f, w, A, B)  # noqa: E731
    return nabla(du, nabla(dv, Z)) - nabla(dv, nabla(du, Z))


def _path(p0, corner, p1) -> PiecewiseCurve:
    segs = [
        CurveSegment(a[0] + (b[0] - a[0]) * _t, a[1] + (b[1] - a[1]) * _t)
        for a, b in ((p0, corner), (corner, p1))
    ]
    return PiecewiseCurve(tuple(segs))


def holonomy_defect_quotient(
    m: MetricPatch,
    f: Frame,
    w: OneForm,
    Z: VectorField,
    p: tuple[float, float],
    s: float,
    t: float,
    tol: float = 1e-14,
) -> np.ndarray:
    """``(J^{gamma^-}(Z_q) - J^{delta^-}(Z_q)) / (s t)`` in coordinate components at ``p``.

    ``gamma`` runs from ``p`` along u then v to the far corner ``q``,
    ``delta`` along v then u.
    """
    u0, v0 = map(float, p)
    q = (u0 + s, v0 + t)
    c = m.chart
    for x, y in ((u0, v0), q):
        if not bool(c.contains(x, y)):
            raise CurveError("parallelogram leaves the chart")
    m.singular.check(np.array([u0, q[0]]), np.array([v0, q[1]]), what="parallelogram")
    gamma = _path((u0, v0), (q[0], v0), q)
    delta = _path((u0, v0), (u0, q[1]), q)
    th_g = transport_angle(w, gamma, tol=tol).lift
    th_d = transport_angle(w, delta, tol=tol).lift

    Xq, Yq = f.components_at(np.array([q[0]]), np.array([q[1]]))
    Zq = Z.at(np.array([q[0]]), np.array([q[1]]))
    Xq, Yq, Zq = (a[:, 0] for a in (Xq, Yq, Zq))
    zq = np.array([
        float(m.inner_at(q[0], q[1], Zq[:, None], Xq[:, None])[0]),
        float(m.inner_at(q[0], q[1], Zq[:, None], Yq[:, None])[0]),
    ])
    # transporting back along gamma^- rotates frame coordinates by -theta_gamma
    diff = (_rotation(-th_g) - _rotation(-th_d)) @ zq / (s * t)
    Xp, Yp = f.components_at(np.array([u0]), np.array([v0]))
    return diff[0] * Xp[:, 0] + diff[1] * Yp[:, 0]


def _flow(field: VectorField, p, t: float, chart, rtol: float, atol: float) -> np.ndarray:
    def rhs(_, y):
        ja, jb = evaluate_many([field.a, field.b], {"u": y[0:1], "v": y[1:2]})
        return [ja.value[0], jb.value[0]]

    sol = solve_ivp(rhs, (0.0, t), np.asarray(p, float), method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    end = sol.y[:, -1]
    if chart is not None and not bool(np.all(chart.contains(sol.y[0], sol.y[1]))):
        raise CurveError("flow leaves the chart")
    return end


def flow_commutator(
    X: VectorField,
    Y: VectorField,
    p: tuple[float, float],
    t: float,
    chart=None,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> np.ndarray:
    """``exp(-tY) exp(-tX) exp(tY) exp(tX) (p)``, each flow by adaptive RK45."""
    q = np.asarray(p, float)
    for field, sign in ((X, 1.0), (Y, 1.0), (X, -1.0), (Y, -1.0)):
        q = _flow(field, q, sign * t, chart, rtol, atol)
    return q


def bracket_at(X: VectorField, Y: VectorField, p) -> np.ndarray:
    """``[X, Y]`` at a single point."""
    return lie_bracket(X, Y).at(np.array([p[0]], float), np.array([p[1]], float))[:, 0]
