import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvatura.jets import Jet, JetDomainError, atan2, monomials, n_coeffs


def _var(x, slot, order=4):
    return Jet.variable(np.atleast_1d(x), slot, order)


def test_monomial_layout():
    assert n_coeffs(3) == 10
    assert monomials(2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_product_of_variables():
    u, v = _var(2.0, 0), _var(3.0, 1)
    j = u * u * v
    assert j.partial(0, 0)[0] == 12
    assert j.partial(1, 0)[0] == 12
    assert j.partial(2, 1)[0] == 2
    assert j.partial(3, 0)[0] == 0


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_exp_log_inverse(x, y):
    u, v = _var(x, 0), _var(y, 1)
    j = (u * v).exp().log()
    ref = u * v
    np.testing.assert_allclose(j.c, ref.c, atol=1e-11 * (1 + np.abs(ref.c).max()))


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_pythagorean_jet(x, y):
    u, v = _var(x, 0), _var(y, 1)
    w = u * v + u
    one = w.sin() * w.sin() + w.cos() * w.cos()
    assert abs(one.value[0] - 1) < 1e-15
    assert np.max(np.abs(one.c[1:])) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(0.1, 2))
def test_inverse_trig(x, y):
    u = _var(x, 0)
    np.testing.assert_allclose(u.asin().sin().c, u.c, atol=1e-12)
    np.testing.assert_allclose(u.acos().cos().c, u.c, atol=1e-12)
    np.testing.assert_allclose(u.atan().tan().c, u.c, atol=1e-12)
    t = atan2(_var(y, 1) * 0 + x, _var(y, 1))
    ref = (_var(y, 1).reciprocal() * x).atan()
    np.testing.assert_allclose(t.c, ref.c, atol=1e-12)


def test_atan2_all_quadrants():
    for ang in np.linspace(-3.1, 3.1, 13):
        r = _var(1.3, 0)
        j = atan2(r * math.sin(ang), r * math.cos(ang))
        assert j.value[0] == pytest.approx(ang, abs=1e-15)
        # polar angle does not depend on the radius
        assert np.max(np.abs(j.c[1:])) < 1e-12


def test_diff_shift_is_exact():
    u, v = _var(0.7, 0), _var(-0.4, 1)
    j = (u * u * v).sin()
    d = j.diff(0)
    assert d.order == j.order - 1
    ref = (u * u * v).cos() * (u * v * 2)
    np.testing.assert_allclose(d.c, ref.truncate(d.order).c, rtol=1e-13, atol=1e-15)


def test_domain_errors():
    with pytest.raises(JetDomainError):
        _var(-1.0, 0).log()
    with pytest.raises(JetDomainError):
        _var(0.0, 0).reciprocal()
    with pytest.raises(JetDomainError):
        _var(2.0, 0).asin()


def test_fractional_power_matches_sqrt():
    u = _var(1.7, 0)
    np.testing.assert_allclose(u.power(0.5).c, u.sqrt().c, rtol=1e-14)
    np.testing.assert_allclose((u ** 3).c, (u * u * u).c, rtol=1e-14)
