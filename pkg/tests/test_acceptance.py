"""Acceptance criteria, each at its stated tolerance.

Independent reference values are written out by hand below; none of them is
produced by the package itself.
"""

import math
import time

import numpy as np
import pytest

from curvatura.boundary import exterior_angles
from curvatura.catalog import get_surface, surface_names
from curvatura.connection import connection_form, gauge_transform, gauss_curvature
from curvatura.curves import circle, closed_curve, ellipse, great_circle_arc, latitude, parse_curve, polygon
from curvatura.expr import evaluate, parse
from curvatura.forms import VectorField
from curvatura.geometry import gram_schmidt_frame, induced_metric, inner
from curvatura.transport import (
    bracket_at,
    curvature_operator,
    flow_commutator,
    holonomy_defect_quotient,
    second_covariant_commutator,
)
from curvatura.verify import (
    DomainSpec,
    verify_compact,
    verify_excess,
    verify_general,
    verify_holonomy,
    verify_local,
    verify_turning,
)
from oracles import brioschi

TWO_PI = 2 * math.pi
criterion = pytest.mark.criterion


def _setup(name, **kw):
    m = get_surface(name, **kw).metric
    f = gram_schmidt_frame(m)
    return m, f, connection_form(m, f)


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


@criterion(1, "sphere total curvature 4 pi (residual < 1e-6, < 2 s)")
def test_c01_sphere_total_curvature():
    rep, dt = _timed(verify_compact, get_surface("sphere", R=1.0), 1e-6)
    assert rep.lhs == 4 * math.pi
    assert rep.residual < 1e-6 and rep.passed
    assert dt < 2.0


@criterion(2, "bumpy sphere total curvature 4 pi (residual < 1e-4, < 10 s)")
def test_c02_bumpy_sphere():
    rep, dt = _timed(verify_compact, get_surface("bumpy_sphere", R=1.0, eps=0.1, m=3), 1e-4)
    assert abs(rep.rhs - 4 * math.pi) < 1e-4
    assert dt < 10.0


@criterion(3, "torus(2,1) total curvature 0 (residual < 1e-6, < 2 s)")
def test_c03_torus():
    rep, dt = _timed(verify_compact, get_surface("torus", R=2.0, r=1.0), 1e-6)
    assert rep.lhs == 0.0
    assert abs(rep.rhs) < 1e-6
    assert dt < 2.0


@criterion(4, "spherical cap pi/3: curvature pi, boundary pi, sum 2 pi (residual < 1e-6)")
def test_c04_spherical_cap():
    m, f, w = _setup("sphere")
    rep = verify_local(m, f, w, DomainSpec.bounded_by(latitude(math.pi / 3)), 1e-6)
    assert abs(rep.terms["curvature_integral"] - math.pi) < 1e-6
    assert abs(rep.terms["geodesic_curvature_integral"] - math.pi) < 1e-6
    assert abs(rep.rhs - TWO_PI) < 1e-6 and rep.passed


def _octant():
    # three mutually orthogonal unit vectors around the direction (-1, 0, 0)
    verts = []
    for k in range(3):
        a = 0.3 + TWO_PI * k / 3
        x, y, z = -1 / math.sqrt(3), math.sqrt(2 / 3) * math.cos(a), math.sqrt(2 / 3) * math.sin(a)
        verts.append((math.acos(z), math.atan2(y, x) % TWO_PI))
    c = closed_curve([great_circle_arc(p, q) for p, q in zip(verts, verts[1:] + verts[:1])])
    return c if c.signed_area() > 0 else c.reversed()


@criterion(5, "geodesic octant: angle excess = area = pi/2 (residual < 1e-5)")
def test_c05_octant_excess():
    m, f, w = _setup("sphere")
    rep = verify_excess(m, f, w, DomainSpec.bounded_by(_octant()), 1e-5)
    assert abs(rep.lhs - math.pi / 2) < 1e-5
    assert abs(rep.rhs - math.pi / 2) < 1e-5
    assert rep.residual < 1e-5


@criterion(6, "latitude holonomy = 2 pi (1 - cos theta0) mod 2 pi (residual < 1e-6)")
@pytest.mark.parametrize("theta0", [math.pi / 6, math.pi / 3, math.pi / 2])
def test_c06_latitude_holonomy(theta0):
    m, f, w = _setup("sphere")
    rep = verify_holonomy(m, f, w, latitude(theta0), tol=1e-6)
    expected = TWO_PI * (1 - math.cos(theta0))
    assert abs(math.remainder(rep.lhs - expected, TWO_PI)) < 1e-6
    assert rep.residual < 1e-6


@criterion(7, "ellipse turns 2 pi (< 1e-8); regular M-gons sum to (M - 2) pi (< 1e-12)")
def test_c07_turning():
    rep = verify_turning(ellipse(3.0, 1.0), 1e-8)
    assert rep.residual < 1e-8
    for M in range(3, 9):
        P = [(math.cos(TWO_PI * k / M), math.sin(TWO_PI * k / M)) for k in range(M)]
        beta = math.fsum(exterior_angles(polygon(P)).interior)
        assert abs(beta - (M - 2) * math.pi) < 1e-12


@criterion(8, "plane triangle: local check reproduces A + B + C = pi (residual < 1e-12)")
def test_c08_euclid_triangle():
    m, f, w = _setup("plane")
    tri = polygon([(0.0, 0.0), (3.0, 0.0), (1.0, 2.0)])
    rep = verify_local(m, f, w, DomainSpec.bounded_by(tri), 1e-12)
    assert rep.residual < 1e-12
    assert abs(math.fsum(exterior_angles(tri).interior) - math.pi) < 1e-12


@criterion(9, "plane annulus: three-term sum 0 for chi = 0, two loops (residual < 1e-8)")
def test_c09_annulus():
    m, f, w = _setup("plane")
    d = DomainSpec.bounded_by([circle(0, 0, 2), circle(0, 0, 1, clockwise=True)], euler_char=0)
    rep = verify_general(m, f, w, d, 1e-8)
    assert rep.lhs == 0.0 and rep.residual < 1e-8


@criterion(10, "curvature form unchanged by 5 random gauges (max |delta d omega| < 1e-8, 32x32)")
@pytest.mark.parametrize("name", surface_names())
def test_c10_gauge_invariance(name):
    rng = np.random.default_rng(100)
    m, f, w = _setup(name)
    u, v = m.probe_points(32)
    base = evaluate(w.d().c, {"u": u, "v": v}).value
    for _ in range(5):
        a, b, c, k = rng.uniform(-2, 2, 4)
        g = f"{a:.8f}*sin({k:.8f}*u + v) + {b:.8f}*u*v + {c:.8f}*cos(v)"
        _, w2 = gauge_transform(m, f, g, w)
        assert np.max(np.abs(evaluate(w2.d().c, {"u": u, "v": v}).value - base)) < 1e-8


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)))


@criterion(11, "curvature operator tensorial and skew in both pairs (relative error < 1e-7)")
@pytest.mark.parametrize("name", surface_names())
def test_c11_tensoriality(name):
    rng = np.random.default_rng(11)
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 50, 0.1)
    fields = []
    for r in rng.uniform(-1, 1, (4, 4)):
        fields.append(VectorField(f"{r[0]:.6f}*cos(v) + {r[1]:.6f}*u + 0.5", f"{r[2]:.6f}*sin(u*v) + {r[3]:.6f}"))
    X, Y, Z, W = fields
    fa, ga, ha = "1 + u*u/10", "2 + cos(v/3)", "exp(-u/5)*(1 + v/20)"
    R = lambda A, B, C: curvature_operator(m, f, w, A, B, C)  # noqa: E731
    F, G, H = parse(fa), parse(ga), parse(ha)
    assert _rel(R(X * F, Y * G, Z * H).at(u, v), (R(X, Y, Z) * (F * G * H)).at(u, v)) < 1e-7
    assert _rel(R(X, Y, Z).at(u, v), -R(Y, X, Z).at(u, v)) < 1e-7
    a = evaluate(inner(m, R(X, Y, Z), W), {"u": u, "v": v}).value
    b = evaluate(inner(m, R(X, Y, W), Z), {"u": u, "v": v}).value
    assert _rel(a, -b) < 1e-7


@criterion(12, "holonomy defect quotient converges as s = t halves 1e-2 .. 1.25e-3 (final < 1e-3)")
def test_c12_defect_quotient():
    m, f, w = _setup("sphere")
    Z, p = VectorField.coordinate("u"), (math.pi / 2, 0.0)
    ref = second_covariant_commutator(m, f, w, Z).at(np.array([p[0]]), np.array([p[1]]))[:, 0]
    # R(d_theta, d_phi) d_theta = -d_phi on the unit sphere
    assert np.allclose(ref, [0.0, -1.0], atol=1e-14)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
        errs.append(float(np.linalg.norm(holonomy_defect_quotient(m, f, w, Z, p, h, h) - ref)))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs
    assert errs[-1] < 1e-3


@criterion(13, "flow commutator remainder is O(t^3) (Richardson slope 3.0 +- 0.3)")
def test_c13_flow_commutator():
    X, Y, p = VectorField(0, "u^2"), VectorField(1, 0), (1.0, 0.0)
    br = bracket_at(X, Y, p)
    assert np.allclose(br, [0.0, -2.0])
    rem = []
    for t in (0.2, 0.1, 0.05, 0.025):
        q = flow_commutator(X, Y, p, t)
        rem.append(float(np.linalg.norm(q - np.asarray(p) - t * t * br)))
    slopes = [math.log2(a / b) for a, b in zip(rem, rem[1:])]
    assert all(abs(s - 3.0) <= 0.3 for s in slopes), slopes


# hand-placed triangle (0,0), (0.5,0), (0,0.5): right angle at the origin and
# base angles acos(1.25 / sqrt(2.125)) from the geodesic circle centred at
# (1.25, 1.25); the excess is worked out from these angles alone.
HYPERBOLIC_EXCESS = 2 * math.acos(1.25 / math.sqrt(2.125)) - math.pi / 2


@criterion(14, "Poincare disk k = -1 (< 1e-8); geodesic triangle deficit = area (< 1e-4)")
def test_c14_hyperbolic():
    rng = np.random.default_rng(14)
    m, f, w = _setup("poincare_disk")
    u, v = m.chart.random_points(rng, 100, 0.0)
    k = evaluate(gauss_curvature(m, f, w), {"u": u, "v": v}).value
    assert np.max(np.abs(k + 1)) < 1e-8
    assert np.max(np.abs(brioschi(m, u, v) + 1)) < 1e-8
    tri = parse_curve("hyperbolic_triangle:(0,0),(0.5,0),(0,0.5)")
    rep = verify_excess(m, f, w, DomainSpec.bounded_by(tri), 1e-4)
    assert rep.residual < 1e-4
    assert abs(rep.lhs - HYPERBOLIC_EXCESS) < 1e-4
    assert abs(rep.rhs - HYPERBOLIC_EXCESS) < 1e-4


@criterion(15, "sphere metric and embedded sphere give the same k at 100 points (< 1e-8)")
def test_c15_theorema_egregium():
    rng = np.random.default_rng(15)
    s = get_surface("sphere")
    a = s.metric
    b = induced_metric(s.embedding)
    u, v = a.chart.random_points(rng, 100, 0.05)
    ka = evaluate(gauss_curvature(a, gram_schmidt_frame(a)), {"u": u, "v": v}).value
    kb = evaluate(gauss_curvature(b, gram_schmidt_frame(b)), {"u": u, "v": v}).value
    assert np.max(np.abs(ka - kb)) < 1e-8
