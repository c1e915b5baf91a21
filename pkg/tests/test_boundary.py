import math

import numpy as np
import pytest

from curvatura.boundary import (
    ArcLengthCurve,
    UnwrapError,
    arc_length,
    exterior_angles,
    geodesic_curvature,
    geodesic_curvature_integral,
    tangent_angle_lift,
    turning_angle,
)
from curvatura.catalog import get_surface
from curvatura.connection import connection_form
from curvatura.curves import (
    CurveError,
    CurveSegment,
    PiecewiseCurve,
    circle,
    ellipse,
    great_circle_arc,
    latitude,
    poincare_geodesic,
    polygon,
)
from curvatura.expr import evaluate_many
from curvatura.geometry import ChartError, SingularLocusError, gram_schmidt_frame

rng = np.random.default_rng(17)


def _setup(name, **kw):
    s = get_surface(name, **kw)
    f = gram_schmidt_frame(s.metric)
    return s, s.metric, f, connection_form(s.metric, f)


def test_arc_length_examples():
    _, m, _, _ = _setup("plane")
    assert arc_length(circle(1, 2, 2), m)[0] == pytest.approx(4 * math.pi, rel=1e-13)
    assert arc_length(polygon([(0, 0), (3, 0), (3, 4)]), m)[0] == pytest.approx(12.0, rel=1e-14)
    _, m, _, _ = _setup("sphere")
    for th in (0.3, math.pi / 2, 2.5):
        assert arc_length(latitude(th), m)[0] == pytest.approx(2 * math.pi * math.sin(th), rel=1e-13)
    arc = great_circle_arc((1.0, 0.5), (1.4, 1.9))
    a = np.array([math.sin(1.0) * math.cos(0.5), math.sin(1.0) * math.sin(0.5), math.cos(1.0)])
    b = np.array([math.sin(1.4) * math.cos(1.9), math.sin(1.4) * math.sin(1.9), math.cos(1.4)])
    assert arc_length(PiecewiseCurve((arc,)), m)[0] == pytest.approx(math.acos(a @ b), rel=1e-12)
    _, m, _, _ = _setup("poincare_disk")
    L = arc_length(PiecewiseCurve((CurveSegment("0.5*t", "0"),)), m)[0]
    assert L == pytest.approx(2 * math.atanh(0.5), rel=1e-13)


def test_arc_length_parameter_round_trip():
    _, m, _, _ = _setup("sphere")
    c = polygon([(1.0, 1.0), (2.0, 1.2), (1.5, 2.5)])
    L, ac = arc_length(c, m)
    s = np.linspace(0, L, 41)
    T = ac.parameter(s)
    assert T[0] == pytest.approx(0.0, abs=1e-13) and T[-1] == pytest.approx(3.0, abs=1e-12)
    assert np.all(np.diff(T) > 0)
    np.testing.assert_allclose(ac.speed(s[1:-1]), 1.0, atol=1e-10)


def test_arc_length_rejects_singular_locus():
    _, m, _, _ = _setup("sphere")
    with pytest.raises(SingularLocusError):
        arc_length(PiecewiseCurve((CurveSegment("t", "1"),)), m)


def test_curves_must_stay_in_chart():
    _, m, _, _ = _setup("poincare_disk")
    with pytest.raises(ChartError, match="leaves the chart"):
        arc_length(circle(0, 0, 0.7), m)
    _, m, _, _ = _setup("sphere")
    # jumps across the pole line between samples
    with pytest.raises((ChartError, SingularLocusError)):
        arc_length(circle(0.0, 1.0, 0.5), m)
    # periodic phi may run past 2 pi
    arc_length(PiecewiseCurve((CurveSegment("1", "6 + t"),)), m)


def test_great_circle_seam():
    with pytest.raises(CurveError, match="seam"):
        great_circle_arc((1.0, 6.0), (1.2, 0.3))
    great_circle_arc((1.0, 2.0), (1.3, 4.5))  # wide in phi, no seam crossing


def test_geodesic_curvature_examples():
    _, m, f, w = _setup("plane")
    line = PiecewiseCurve((CurveSegment("1 + 2*t", "3 - t"),))
    assert np.max(np.abs(geodesic_curvature(line, m, f, w, np.linspace(0, 1, 9)))) < 1e-15
    for r in (0.5, 2.0):
        kg = geodesic_curvature(circle(0.3, 0.1, r), m, f, w, np.linspace(0, 1, 9))
        np.testing.assert_allclose(kg, 1 / r, rtol=1e-13)
        kg = geodesic_curvature(circle(0.3, 0.1, r, clockwise=True), m, f, w, np.linspace(0, 1, 9))
        np.testing.assert_allclose(kg, -1 / r, rtol=1e-13)
    _, m, f, w = _setup("sphere")
    for th in (0.4, 1.0, math.pi / 2, 2.0):
        L, ac = arc_length(latitude(th), m)
        kg = geodesic_curvature(ac, m, f, w, np.linspace(0, L, 7))
        np.testing.assert_allclose(kg, 1 / math.tan(th), atol=1e-12)
        kg = geodesic_curvature(latitude(th, reverse=True), m, f, w, np.linspace(0, 1, 7))
        np.testing.assert_allclose(kg, -1 / math.tan(th), atol=1e-12)


def test_geodesics_have_zero_curvature():
    _, m, f, w = _setup("sphere")
    arc = PiecewiseCurve((great_circle_arc((0.8, 0.3), (2.0, 2.0)),))
    assert np.max(np.abs(geodesic_curvature(arc, m, f, w, np.linspace(0, 1, 17)))) < 1e-10
    _, m, f, w = _setup("poincare_disk")
    arc = PiecewiseCurve((poincare_geodesic((-0.4, 0.1), (0.3, 0.35)),))
    assert np.max(np.abs(geodesic_curvature(arc, m, f, w, np.linspace(0, 1, 17)))) < 1e-10


def _extrinsic_kg(emb, seg, s):
    """det(N, r', r'') / |r'|^3 from the embedding's second-order jets."""
    pos, vel, acc = seg.derivatives(s, 2)
    jets = evaluate_many(list(emb.components), {"u": pos[0], "v": pos[1]}, order=2)
    ru = np.stack([j.partial(1, 0) for j in jets])
    rv = np.stack([j.partial(0, 1) for j in jets])
    ruu = np.stack([j.partial(2, 0) for j in jets])
    ruv = np.stack([j.partial(1, 1) for j in jets])
    rvv = np.stack([j.partial(0, 2) for j in jets])
    u1, v1, u2, v2 = vel[0], vel[1], acc[0], acc[1]
    r1 = ru * u1 + rv * v1
    r2 = ruu * u1**2 + 2 * ruv * u1 * v1 + rvv * v1**2 + ru * u2 + rv * v2
    n = np.cross(ru, rv, axis=0)
    n /= np.linalg.norm(n, axis=0)
    return np.einsum("ij,ij->j", n, np.cross(r1, r2, axis=0)) / np.linalg.norm(r1, axis=0) ** 3


@pytest.mark.parametrize("name", ["sphere", "torus", "bumpy_sphere"])
def test_geodesic_curvature_matches_embedding(name):
    s, m, f, w = _setup(name)
    seg = CurveSegment("1.2 + 0.3*sin(2*pi*t)", "2 + 0.5*cos(2*pi*t) + 0.2*t")
    c = PiecewiseCurve((seg,))
    ts = np.linspace(0, 1, 23)
    np.testing.assert_allclose(
        geodesic_curvature(c, m, f, w, ts), _extrinsic_kg(s.embedding, seg, ts), rtol=1e-9, atol=1e-10
    )


def test_orientation_flips_integral():
    _, m, f, w = _setup("sphere")
    c = polygon([(1.0, 1.0), (2.0, 1.2), (1.5, 2.5)])
    a, _ = geodesic_curvature_integral(c, m, f, w)
    b, _ = geodesic_curvature_integral(c.reversed(), m, f, w)
    assert a == pytest.approx(-b, abs=1e-12)
    ea, eb = exterior_angles(c, m, f), exterior_angles(c.reversed(), m, f)
    assert ea.total == pytest.approx(-eb.total, abs=1e-14)


def test_exterior_angle_examples():
    square = polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    ext = exterior_angles(square)
    np.testing.assert_allclose(ext.angles, [math.pi / 2] * 4, atol=1e-15)
    np.testing.assert_allclose(ext.interior, [math.pi / 2] * 4, atol=1e-15)
    cw = exterior_angles(square.reversed())
    np.testing.assert_allclose(cw.angles, [-math.pi / 2] * 4, atol=1e-15)
    tri = exterior_angles(polygon([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]))
    np.testing.assert_allclose(tri.angles, [2 * math.pi / 3] * 3, atol=1e-14)
    # a smooth closed curve has one junction, its seam, with no turn
    seam = exterior_angles(circle(0, 0, 1))
    assert len(seam) == 1 and abs(seam.angles[0]) < 1e-14


def test_octant_angles_are_right_angles():
    _, m, f, _ = _setup("sphere")
    P = [(math.pi / 2, 0.2), (math.pi / 2, 0.2 + math.pi / 2), (0.35, 0.2 + math.pi / 4)]
    tri = PiecewiseCurve(tuple(great_circle_arc(a, b) for a, b in zip(P, P[1:] + P[:1])), closed=True)
    ext = exterior_angles(tri, m, f)
    assert ext.total == pytest.approx(3 * math.pi - sum(ext.interior))
    assert all(0 < b < math.pi for b in ext.interior)


@pytest.mark.parametrize("M", range(3, 9))
def test_polygon_law(M):
    P = [(math.cos(2 * math.pi * k / M), math.sin(2 * math.pi * k / M)) for k in range(M)]
    ext = exterior_angles(polygon(P))
    assert sum(ext.interior) == pytest.approx((M - 2) * math.pi, abs=1e-12)
    assert float(turning_angle(polygon(P))) == pytest.approx(2 * math.pi, abs=1e-12)


def test_random_convex_polygon_turning():
    for _ in range(5):
        ang = np.sort(rng.uniform(0, 2 * math.pi, 7))
        P = list(zip(np.cos(ang), np.sin(ang)))
        ext = exterior_angles(polygon(P))
        assert ext.total == pytest.approx(2 * math.pi, abs=1e-12)


def test_cusp_is_rejected():
    with pytest.raises(CurveError, match="cusp"):
        exterior_angles(polygon([(0, 0), (2, 0), (1, 0), (1, 1)]))


def test_turning_of_smooth_curves():
    assert float(turning_angle(ellipse(3, 1))) == pytest.approx(2 * math.pi, abs=1e-10)
    assert float(turning_angle(circle(0, 0, 1, clockwise=True))) == pytest.approx(-2 * math.pi, abs=1e-12)
    # limacon with an inner loop turns twice
    lim = PiecewiseCurve((CurveSegment("(1 + 2*cos(2*pi*t))*cos(2*pi*t)", "(1 + 2*cos(2*pi*t))*sin(2*pi*t)"),),
                         closed=True)
    assert float(turning_angle(lim)) == pytest.approx(4 * math.pi, abs=1e-9)


def test_tangent_angle_lift_is_continuous():
    many = PiecewiseCurve((CurveSegment("cos(2*pi*300*t)", "sin(2*pi*300*t)"),), closed=True)
    (s, lift), = tangent_angle_lift(many)
    assert lift[-1] - lift[0] == pytest.approx(600 * math.pi, rel=1e-12)
    assert np.max(np.abs(np.diff(lift))) < math.pi / 2


def test_unwrap_failure():
    wild = PiecewiseCurve((CurveSegment("cos(2*pi*30000*t)", "sin(2*pi*30000*t)"),))
    with pytest.raises(UnwrapError):
        tangent_angle_lift(wild)
