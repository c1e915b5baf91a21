"""Levi-Civita connection in an orthonormal frame: omega, d(omega), Gauss curvature.

Sign conventions (see docs/conventions.md)::

    omega(Z) := -<nabla_Z X, Y>     so that  nabla_Z X = -omega(Z) Y,
                                             nabla_Z Y =  omega(Z) X
    Omega    := d omega = c du^dv,  k := Omega(X, Y)
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .expr import Expr, as_expr, cos, evaluate_many, sin
from .forms import OneForm, TwoForm, VectorField, exact
from .geometry import Frame, MetricPatch, inner

__all__ = [
    "Christoffel",
    "OneForm",
    "TwoForm",
    "christoffel",
    "christoffel_fields",
    "connection_form",
    "coordinate_covariant_derivative",
    "exterior_derivative",
    "gauge_transform",
    "gauss_curvature",
]


class Christoffel(NamedTuple):
    """Second-kind symbols; ``u_uv`` is the u-component of nabla_{d/du} d/dv."""

    u_uu: object
    u_uv: object
    u_vv: object
    v_uu: object
    v_uv: object
    v_vv: object


def christoffel_fields(m: MetricPatch) -> Christoffel:
    E, F, G = m.E, m.F, m.G
    Eu, Ev = E.diff("u"), E.diff("v")
    Fu, Fv = F.diff("u"), F.diff("v")
    Gu, Gv = G.diff("u"), G.diff("v")
    # first kind: [ij, l]
    uu_u, uu_v = 0.5 * Eu, Fu - 0.5 * Ev
    uv_u, uv_v = 0.5 * Ev, 0.5 * Gu
    vv_u, vv_v = Fv - 0.5 * Gu, 0.5 * Gv
    det = m.det
    # raise the last index with the inverse metric [[G, -F], [-F, E]] / det
    def up_u(a, b):
        return (G * a - F * b) / det

    def up_v(a, b):
        return (E * b - F * a) / det

    return Christoffel(
        up_u(uu_u, uu_v),
        up_u(uv_u, uv_v),
        up_u(vv_u, vv_v),
        up_v(uu_u, uu_v),
        up_v(uv_u, uv_v),
        up_v(vv_u, vv_v),
    )


def christoffel(m: MetricPatch, at) -> Christoffel:
    """The six symbols at a point (or arrays of points) ``at = (u, v)``."""
    u, v = np.asarray(at[0], float), np.asarray(at[1], float)
    m.singular.check(u, v, what="point")
    jets = evaluate_many(list(christoffel_fields(m)), {"u": u, "v": v})
    shape = np.broadcast(u, v).shape
    vals = [j.value.reshape(shape) for j in jets]
    if not shape:
        vals = [float(x) for x in vals]
    return Christoffel(*vals)


def coordinate_covariant_derivative(
    m: MetricPatch, Z: VectorField, W: VectorField, gamma: Christoffel | None = None
) -> VectorField:
    """``nabla_Z W = (Z(W^k) + Gamma^k_ij Z^i W^j) d/dk``."""
    g = gamma if gamma is not None else christoffel_fields(m)
    za, zb, wa, wb = Z.a, Z.b, W.a, W.b
    cu = Z.apply(wa) + g.u_uu * za * wa + g.u_uv * (za * wb + zb * wa) + g.u_vv * zb * wb
    cv = Z.apply(wb) + g.v_uu * za * wa + g.v_uv * (za * wb + zb * wa) + g.v_vv * zb * wb
    return VectorField(cu, cv)


def connection_form(m: MetricPatch, f: Frame, check: bool = False) -> OneForm:
    """``omega = p du + q dv`` with ``omega(Z) = -<nabla_Z X, Y>``."""
    if check:
        f.check(m)
    g = christoffel_fields(m)
    du, dv = VectorField.coordinate("u"), VectorField.coordinate("v")
    p = -inner(m, coordinate_covariant_derivative(m, du, f.X, g), f.Y)
    q = -inner(m, coordinate_covariant_derivative(m, dv, f.X, g), f.Y)
    return OneForm(p, q)


def exterior_derivative(w: OneForm) -> TwoForm:
    return w.d()


def curvature_form(m: MetricPatch, f: Frame) -> TwoForm:
    return connection_form(m, f).d()


def gauss_curvature(m: MetricPatch, f: Frame, w: OneForm | None = None) -> Expr:
    """``k = d omega (X, Y)``."""
    w = w if w is not None else connection_form(m, f)
    return w.d()(f.X, f.Y)


def gauge_transform(
    m: MetricPatch, f: Frame, theta, w: OneForm | None = None
) -> tuple[Frame, OneForm]:
    """Rotate the frame pointwise by ``theta``; returns ``(X', Y')`` and ``omega - d theta``."""
    theta = as_expr(theta)
    w = w if w is not None else connection_form(m, f)
    c, s = cos(theta), sin(theta)
    X2 = f.X * c + f.Y * s
    Y2 = f.X * (-s) + f.Y * c
    return Frame(X2, Y2, f.orientation, f.flipped), w - exact(theta)
