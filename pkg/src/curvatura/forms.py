"""Vector fields and differential forms on a chart, with expression components."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expr, as_expr, evaluate_many

__all__ = ["OneForm", "TwoForm", "VectorField", "exact"]


@dataclass(frozen=True)
class VectorField:
    """``a * d/du + b * d/dv``."""

    a: Expr
    b: Expr

    def __post_init__(self):
        object.__setattr__(self, "a", as_expr(self.a))
        object.__setattr__(self, "b", as_expr(self.b))

    @classmethod
    def coordinate(cls, var: str) -> "VectorField":
        return cls(1.0, 0.0) if var == "u" else cls(0.0, 1.0)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "VectorField":
        return VectorField(-self.a, -self.b)

    def __mul__(self, f) -> "VectorField":
        f = as_expr(f)
        return VectorField(f * self.a, f * self.b)

    __rmul__ = __mul__

    def apply(self, f: Expr) -> Expr:
        """Directional derivative Z(f)."""
        f = as_expr(f)
        return self.a * f.diff("u") + self.b * f.diff("v")

    def at(self, u, v) -> np.ndarray:
        """Components at points, shape ``(2, N)``."""
        ja, jb = evaluate_many([self.a, self.b], {"u": u, "v": v})
        return np.stack([ja.value, jb.value])


@dataclass(frozen=True)
class OneForm:
    """``p du + q dv``."""

    p: Expr
    q: Expr

    def __post_init__(self):
        object.__setattr__(self, "p", as_expr(self.p))
        object.__setattr__(self, "q", as_expr(self.q))

    def __call__(self, Z: VectorField) -> Expr:
        return self.p * Z.a + self.q * Z.b

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.p - other.p, self.q - other.q)

    def __neg__(self) -> "OneForm":
        return OneForm(-self.p, -self.q)

    def __mul__(self, f) -> "OneForm":
        f = as_expr(f)
        return OneForm(f * self.p, f * self.q)

    __rmul__ = __mul__

    def d(self) -> "TwoForm":
        """Exterior derivative ``(dq/du - dp/dv) du^dv``."""
        return TwoForm(self.q.diff("u") - self.p.diff("v"))

    def at(self, u, v) -> np.ndarray:
        jp, jq = evaluate_many([self.p, self.q], {"u": u, "v": v})
        return np.stack([jp.value, jq.value])


@dataclass(frozen=True)
class TwoForm:
    """``c du^dv``."""

    c: Expr

    def __post_init__(self):
        object.__setattr__(self, "c", as_expr(self.c))

    def __call__(self, Z: VectorField, T: VectorField) -> Expr:
        return self.c * (Z.a * T.b - Z.b * T.a)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.c - other.c)

    def __neg__(self) -> "TwoForm":
        return TwoForm(-self.c)

    def at(self, u, v) -> np.ndarray:
        return evaluate_many([self.c], {"u": u, "v": v})[0].value


def exact(theta) -> OneForm:
    """The differential ``d theta`` of a scalar field."""
    theta = as_expr(theta)
    return OneForm(theta.diff("u"), theta.diff("v"))
