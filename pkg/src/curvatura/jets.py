"""Truncated bivariate Taylor jets for exact forward-mode differentiation.

A jet of order ``n`` carries the Taylor coefficients ``f_ij / (i! j!)`` of a
function of two variables for every ``i + j <= n``.  Coefficients are stored
as an array of shape ``(K, N)``: ``K`` monomials ordered by total degree, and
``N`` evaluation points, so that one pass through an expression tree evaluates
the whole batch.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = [
    "Jet",
    "JetDomainError",
    "monomials",
    "n_coeffs",
]


class JetDomainError(ArithmeticError):
    """A jet operation left the real domain of the function being applied."""


def n_coeffs(order: int) -> int:
    return (order + 1) * (order + 2) // 2


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int], ...]:
    """Multi-indices ``(i, j)`` with ``i + j <= order``, sorted by degree."""
    return tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))


@lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, int], int]:
    return {m: k for k, m in enumerate(monomials(order))}


@lru_cache(maxsize=None)
def _product_plan(order: int):
    """Gather indices and a scatter matrix for the truncated product."""
    mons = monomials(order)
    idx = _index(order)
    left, right, target = [], [], []
    for a, (i1, j1) in enumerate(mons):
        for b, (i2, j2) in enumerate(mons):
            if i1 + i2 + j1 + j2 <= order:
                left.append(a)
                right.append(b)
                target.append(idx[(i1 + i2, j1 + j2)])
    scatter = np.zeros((len(mons), len(left)))
    scatter[target, np.arange(len(left))] = 1.0
    return np.array(left), np.array(right), scatter


@lru_cache(maxsize=None)
def _shift_plan(order: int, axis: int):
    """Source indices and factors for differentiating an ``order + 1`` jet."""
    src_idx = _index(order + 1)
    src, fac = [], []
    for i, j in monomials(order):
        if axis == 0:
            src.append(src_idx[(i + 1, j)])
            fac.append(i + 1.0)
        else:
            src.append(src_idx[(i, j + 1)])
            fac.append(j + 1.0)
    return np.array(src), np.array(fac)[:, None]


def _series_power(a: np.ndarray, p: float) -> np.ndarray:
    """Univariate series of ``a(x)**p``; requires ``a[0] > 0``."""
    n = a.shape[0]
    out = np.zeros_like(a)
    out[0] = a[0] ** p
    for k in range(1, n):
        acc = sum((p * (k - i) - i) * a[k - i] * out[i] for i in range(k))
        out[k] = acc / (k * a[0])
    return out


def _integrate_series(deriv: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Taylor coefficients of f given those of f' (one order lower)."""
    n = deriv.shape[0] + 1
    out = np.empty((n,) + value.shape)
    out[0] = value
    for k in range(1, n):
        out[k] = deriv[k - 1] / k
    return out


class Jet:
    """Truncated Taylor expansion in ``(u, v)`` evaluated at a batch of points."""

    __slots__ = ("c", "order")

    def __init__(self, c: np.ndarray, order: int):
        self.c = c
        self.order = order

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, n: int | None = None) -> "Jet":
        value = np.asarray(value, dtype=float).reshape(-1)
        if n is not None and value.size == 1:
            value = np.full(n, value[0])
        c = np.zeros((n_coeffs(order), value.size))
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, values, axis: int, order: int) -> "Jet":
        values = np.asarray(values, dtype=float).reshape(-1)
        c = np.zeros((n_coeffs(order), values.size))
        c[0] = values
        if order >= 1:
            c[1 + axis] = 1.0
        return cls(c, order)

    # accessors ----------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def size(self) -> int:
        return self.c.shape[1]

    def coeff(self, i: int, j: int) -> np.ndarray:
        return self.c[_index(self.order)[(i, j)]]

    def partial(self, i: int, j: int) -> np.ndarray:
        """The mixed partial derivative d^(i+j) f / du^i dv^j."""
        return self.coeff(i, j) * (math.factorial(i) * math.factorial(j))

    def gradient(self) -> tuple[np.ndarray, np.ndarray]:
        return self.partial(1, 0), self.partial(0, 1)

    def hessian(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.partial(2, 0), self.partial(1, 1), self.partial(0, 2)

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.c[: n_coeffs(order)], order)

    def diff(self, axis: int) -> "Jet":
        """Partial derivative along ``axis``; the result has one order less."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _shift_plan(self.order - 1, axis)
        return Jet(self.c[src] * fac, self.order - 1)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.c)))

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, self.size)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.c + other.c, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.c - other.c, self.order)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float), self.order)
        if self.order == 0:
            return Jet(self.c * other.c, 0)
        left, right, scatter = _product_plan(self.order)
        return Jet(scatter @ (self.c[left] * other.c[right]), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float), self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (self.log() * p).exp()
        return self.power(float(p))

    # composition --------------------------------------------------------
    def _nilpotent(self) -> "Jet":
        c = self.c.copy()
        c[0] = 0.0
        return Jet(c, self.order)

    def compose(self, series: np.ndarray) -> "Jet":
        """Apply a univariate function given its Taylor coefficients at ``value``.

        ``series[k]`` holds ``f^(k)(value) / k!`` for ``k = 0..order``.
        """
        h = self._nilpotent()
        out = Jet.constant(series[self.order], self.order, self.size)
        for k in range(self.order - 1, -1, -1):
            out = out * h
            out.c[0] += series[k]
        return out

    def _check(self, ok: np.ndarray, what: str) -> None:
        if not np.all(ok):
            bad = float(self.value[~ok][0])
            raise JetDomainError(f"{what} at value {bad!r}")

    def exp(self) -> "Jet":
        x = self.value
        k = np.arange(self.order + 1)
        fact = np.array([math.factorial(i) for i in k], dtype=float)
        return self.compose(np.exp(x)[None, :] / fact[:, None])

    def log(self) -> "Jet":
        x = self.value
        self._check(x > 0, "log of non-positive value")
        series = np.empty((self.order + 1, x.size))
        series[0] = np.log(x)
        for k in range(1, self.order + 1):
            series[k] = (-1.0) ** (k + 1) / (k * x**k)
        return self.compose(series)

    def _trig(self, quarter: int) -> "Jet":
        # k-th derivative of sin is sin(x + k pi/2); cycle exactly, no shifted arguments
        s, c = np.sin(self.value), np.cos(self.value)
        cycle = (s, c, -s, -c)
        series = np.empty((self.order + 1, s.size))
        for k in range(self.order + 1):
            series[k] = cycle[(k + quarter) % 4] / math.factorial(k)
        return self.compose(series)

    def sin(self) -> "Jet":
        return self._trig(0)

    def cos(self) -> "Jet":
        return self._trig(1)

    def tan(self) -> "Jet":
        c = self.cos()
        self._check(c.value != 0, "tan at a pole")
        return self.sin() / c

    def power(self, p: float) -> "Jet":
        x = self.value
        series = np.empty((self.order + 1, x.size))
        if float(p).is_integer():
            ip = int(p)
            if ip < 0:
                self._check(x != 0, "negative power of zero")
            coef = 1.0
            for k in range(self.order + 1):
                series[k] = coef * x ** (p - k) if (ip < 0 or k <= ip) else 0.0
                coef *= (p - k) / (k + 1)
        else:
            self._check(x >= 0, "fractional power of negative value")
            if self.order > 0:
                self._check(x > 0, "fractional power of zero is not differentiable")
            coef = 1.0
            for k in range(self.order + 1):
                with np.errstate(divide="ignore"):
                    series[k] = coef * x ** (p - k)
                coef *= (p - k) / (k + 1)
        return self.compose(series)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def reciprocal(self) -> "Jet":
        self._check(self.value != 0, "division by zero")
        return self.power(-1.0)

    def abs(self) -> "Jet":
        x = self.value
        if self.order > 0:
            self._check(x != 0, "abs is not differentiable at zero")
        return Jet(self.c * np.sign(x)[None, :], self.order)

    def _from_derivative_series(self, deriv: np.ndarray, value: np.ndarray) -> "Jet":
        return self.compose(_integrate_series(deriv, value))

    def atan(self) -> "Jet":
        x = self.value
        n = self.order
        if n == 0:
            return Jet(np.arctan(self.c), 0)
        base = np.zeros((n, x.size))
        base[0] = 1.0 + x * x
        if n > 1:
            base[1] = 2.0 * x
        if n > 2:
            base[2] = 1.0
        return self._from_derivative_series(_series_power(base, -1.0), np.arctan(x))

    def asin(self) -> "Jet":
        x = self.value
        n = self.order
        self._check(np.abs(x) <= 1, "asin outside [-1, 1]")
        if n == 0:
            return Jet(np.arcsin(self.c), 0)
        self._check(np.abs(x) < 1, "asin is not differentiable at +-1")
        base = np.zeros((n, x.size))
        base[0] = 1.0 - x * x
        if n > 1:
            base[1] = -2.0 * x
        if n > 2:
            base[2] = -1.0
        return self._from_derivative_series(_series_power(base, -0.5), np.arcsin(x))

    def acos(self) -> "Jet":
        return -self.asin() + math.pi / 2


def atan2(y: Jet, x: Jet) -> Jet:
    """Jet of the polar angle of ``(x, y)`` with values in (-pi, pi]."""
    x0, y0 = x.value, y.value
    if np.any((x0 == 0) & (y0 == 0)):
        raise JetDomainError("atan2 of the origin")
    if y.order == 0:
        return Jet(np.arctan2(y0, x0)[None, :], 0)
    use_x = np.abs(x0) >= np.abs(y0)
    safe_x = Jet(np.where(use_x[None, :], x.c, 1.0), x.order)
    safe_y = Jet(np.where(use_x[None, :], 1.0, y.c), y.order)
    via_x = (y / safe_x).atan()
    via_y = -(x / safe_y).atan()
    c = np.where(use_x[None, :], via_x.c, via_y.c)
    c[0] = np.arctan2(y0, x0)
    return Jet(c, y.order)
