import math

import numpy as np
import pytest

from curvatura.catalog import get_surface, surface_names
from curvatura.connection import (
    christoffel,
    connection_form,
    coordinate_covariant_derivative,
    exterior_derivative,
    gauge_transform,
    gauss_curvature,
)
from curvatura.expr import ZERO, evaluate, parse
from curvatura.forms import OneForm, VectorField, exact
from curvatura.geometry import SingularLocusError, gram_schmidt_frame, inner
from curvatura.transport import covariant_derivative
from oracles import brioschi, christoffel_closed_sphere

rng = np.random.default_rng(3)


def _setup(name, **kw):
    m = get_surface(name, **kw).metric
    f = gram_schmidt_frame(m)
    return m, f, connection_form(m, f)


def _val(e, u, v):
    return evaluate(e, {"u": u, "v": v}).value


def test_christoffel_examples():
    assert all(x == 0 for x in christoffel(get_surface("plane").metric, (0.3, 0.4)))
    s = get_surface("sphere").metric
    g = christoffel(s, (math.pi / 2, 1.0))
    assert abs(g.u_vv) < 1e-16 and abs(g.v_uv) < 1e-16
    g = christoffel(s, (math.pi / 4, 1.0))
    assert g.u_vv == pytest.approx(-0.5, rel=1e-14)
    assert g.v_uv == pytest.approx(1.0, rel=1e-14)
    th = rng.uniform(0.2, 2.9, 30)
    g = christoffel(s, (th, th))
    a, b = christoffel_closed_sphere(th)
    np.testing.assert_allclose(g.u_vv, a, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(g.v_uv, b, rtol=1e-13, atol=1e-15)
    with pytest.raises(SingularLocusError):
        christoffel(s, (1e-5, 0.0))


def test_connection_form_examples():
    m, f, w = _setup("plane")
    u, v = m.chart.random_points(rng, 20)
    assert np.all(w.at(u, v) == 0)
    m, f, w = _setup("sphere")
    u, v = m.chart.random_points(rng, 50)
    p, q = w.at(u, v)
    np.testing.assert_allclose(p, 0, atol=1e-15)
    np.testing.assert_allclose(q, -np.cos(u), rtol=1e-13, atol=1e-15)
    m, f, w = _setup("poincare_disk")
    u, v = m.chart.random_points(rng, 50)
    p, q = w.at(u, v)
    lam = 2 / (1 - u**2 - v**2)
    np.testing.assert_allclose(p, lam * v, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(q, -lam * u, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("name", surface_names())
def test_frame_relations(name):
    """nabla_Z X = -omega(Z) Y and nabla_Z Y = omega(Z) X through Christoffel symbols."""
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 40, 0.1)
    for Z in (VectorField(1, 0), VectorField(0, 1), VectorField("sin(u)", "1+u*v")):
        nx = coordinate_covariant_derivative(m, Z, f.X)
        ny = coordinate_covariant_derivative(m, Z, f.Y)
        wz = w(Z)
        for lhs, rhs in ((nx, f.Y * (-wz)), (ny, f.X * wz)):
            np.testing.assert_allclose(lhs.at(u, v), rhs.at(u, v), atol=1e-8)


def test_exterior_derivative_examples():
    assert exterior_derivative(OneForm(0, 0)).c == ZERO
    d = exterior_derivative(OneForm(0, parse("-cos(u)")))
    u = rng.uniform(0, 3, 20)
    np.testing.assert_allclose(_val(d.c, u, u), np.sin(u), rtol=1e-14)
    for text in ("sin(u*v) + exp(u)", "u^3*v - log(2+v^2)", "atan2(v, u + 3)"):
        dd = exterior_derivative(exact(parse(text)))
        assert np.max(np.abs(_val(dd.c, u, u - 1))) < 1e-12


@pytest.mark.parametrize("name", surface_names())
def test_gauss_curvature_matches_brioschi(name):
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 100, 0.05)
    k = _val(gauss_curvature(m, f, w), u, v)
    np.testing.assert_allclose(k, brioschi(m, u, v), rtol=1e-8, atol=1e-8)


def test_gauss_curvature_examples():
    for name, ref in (("plane", 0.0), ("sphere", 1.0), ("poincare_disk", -1.0)):
        m, f, w = _setup(name)
        u, v = m.chart.random_points(rng, 100)
        np.testing.assert_allclose(_val(gauss_curvature(m, f, w), u, v), ref, atol=1e-8)


@pytest.mark.parametrize("name", surface_names())
def test_omega_is_k_times_area(name):
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 60)
    k = _val(gauss_curvature(m, f, w), u, v)
    c = _val(w.d().c, u, v)
    dA = np.sqrt(_val(m.det, u, v))
    np.testing.assert_allclose(c, k * dA, rtol=1e-8, atol=1e-8)


def test_gauge_examples():
    m, f, w = _setup("sphere")
    u, v = m.chart.random_points(rng, 30)
    f0, w0 = gauge_transform(m, f, 0.0, w)
    for a, b in zip(f0.components_at(u, v), f.components_at(u, v)):
        np.testing.assert_allclose(a, b, atol=1e-15)
    np.testing.assert_allclose(w0.at(u, v), w.at(u, v), atol=1e-15)
    f1, w1 = gauge_transform(m, f, math.pi / 2, w)
    X, Y = f.components_at(u, v)
    X1, Y1 = f1.components_at(u, v)
    np.testing.assert_allclose(X1, Y, atol=1e-15)
    np.testing.assert_allclose(Y1, -X, atol=1e-15)
    np.testing.assert_allclose(w1.at(u, v), w.at(u, v), atol=1e-15)

    m, f, w = _setup("plane")
    f2, w2 = gauge_transform(m, f, parse("u*v"), w)
    p, q = w2.at(u, v)
    np.testing.assert_allclose(p, -v, atol=1e-15)
    np.testing.assert_allclose(q, -u, atol=1e-15)
    assert np.max(np.abs(_val(w2.d().c, u, v))) < 1e-14
    assert f2.orthonormality_defect(m, u, v) < 1e-12


@pytest.mark.parametrize("name", surface_names())
def test_gauge_transformed_frame_is_orthonormal(name):
    m, f, w = _setup(name)
    f2, w2 = gauge_transform(m, f, parse("sin(u) * cos(2*v) + u*v"), w)
    u, v = m.chart.random_points(rng, 50)
    assert f2.orthonormality_defect(m, u, v) < 1e-10
    # the new form really is the connection form of the new frame
    np.testing.assert_allclose(w2.at(u, v), connection_form(m, f2).at(u, v), atol=1e-8)


def _random_field(r):
    a = f"{r[0]:.3f}*sin(u) + {r[1]:.3f}*v + 1"
    b = f"{r[2]:.3f}*cos(v) * u + {r[3]:.3f}"
    return VectorField(a, b)


@pytest.mark.parametrize("name", surface_names())
def test_metric_compatibility(name):
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 50, 0.1)
    for _ in range(3):
        X, Y, Z = (_random_field(rng.uniform(-1, 1, 4)) for _ in range(3))
        for nabla in (
            lambda A, B: covariant_derivative(m, f, w, A, B),
            lambda A, B: coordinate_covariant_derivative(m, A, B),
        ):
            lhs = Z.apply(inner(m, X, Y))
            rhs = inner(m, nabla(Z, X), Y) + inner(m, X, nabla(Z, Y))
            a, b = _val(lhs, u, v), _val(rhs, u, v)
            assert np.max(np.abs(a - b) / (1 + np.abs(a))) < 1e-7


@pytest.mark.parametrize("name", surface_names())
def test_connection_axioms(name):
    m, f, w = _setup(name)
    u, v = m.chart.random_points(rng, 50, 0.1)
    nabla = lambda A, B: covariant_derivative(m, f, w, A, B)  # noqa: E731
    X, Y, Z = (_random_field(rng.uniform(-1, 1, 4)) for _ in range(3))
    g, h = parse("1 + 0.3*sin(u*v)"), parse("exp(0.2*u) - v/7")

    def close(A, B):
        np.testing.assert_allclose(A.at(u, v), B.at(u, v), rtol=1e-8, atol=1e-8)

    close(nabla(X + Z, Y), nabla(X, Y) + nabla(Z, Y))  # additivity in the direction
    close(nabla(X, Y + Z), nabla(X, Y) + nabla(X, Z))  # additivity in the field
    close(nabla(X * g, Y), nabla(X, Y) * g)  # function-linear in the direction
    close(nabla(X, Y * h), nabla(X, Y) * h + Y * X.apply(h))  # Leibniz
    # agrees with the Christoffel route
    close(nabla(X, Y), coordinate_covariant_derivative(m, X, Y))


def test_theorema_egregium_sphere():
    intrinsic = get_surface("sphere").metric
    from curvatura.geometry import induced_metric

    embedded = induced_metric(get_surface("sphere").embedding)
    u, v = intrinsic.chart.random_points(rng, 100, 0.05)
    k1 = _val(gauss_curvature(intrinsic, gram_schmidt_frame(intrinsic)), u, v)
    k2 = _val(gauss_curvature(embedded, gram_schmidt_frame(embedded)), u, v)
    assert np.max(np.abs(k1 - k2)) < 1e-8
