"""Metric patches, embeddings, orthonormal frames and the area form."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .expr import Expr, as_expr, evaluate_many, sqrt
from .forms import TwoForm, VectorField

__all__ = [
    "Chart",
    "ChartError",
    "DegenerateMetricError",
    "Embedding",
    "Frame",
    "FrameError",
    "MetricPatch",
    "SingularLocus",
    "SingularLocusError",
    "area_form",
    "gram_schmidt_frame",
    "induced_metric",
    "inner",
]

log = logging.getLogger(__name__)

PROBE_GRID = 64
SINGULAR_DELTA = 1e-3


class DegenerateMetricError(ValueError):
    pass


class FrameError(ValueError):
    pass


class SingularLocusError(ValueError):
    pass


class ChartError(ValueError):
    """A curve or region reaches outside the coordinate chart."""


@dataclass(frozen=True)
class Chart:
    """Axis-aligned coordinate rectangle with optional periodic axes."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float
    periodic_u: bool = False
    periodic_v: bool = False

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError(f"empty chart rectangle {self}")

    @property
    def area(self) -> float:
        return (self.u_max - self.u_min) * (self.v_max - self.v_min)

    def contains(self, u, v, slack: float = 1e-12) -> np.ndarray:
        u, v = np.asarray(u), np.asarray(v)
        return (
            (u >= self.u_min - slack)
            & (u <= self.u_max + slack)
            & (v >= self.v_min - slack)
            & (v <= self.v_max + slack)
        )

    def check_path(self, u, v, what: str = "curve", slack: float = 1e-9) -> None:
        """Samples must stay inside the chart along its non-periodic axes."""
        u, v = np.ravel(u), np.ravel(v)
        for coord, lo, hi, per, axis in (
            (u, self.u_min, self.u_max, self.periodic_u, "u"),
            (v, self.v_min, self.v_max, self.periodic_v, "v"),
        ):
            if per or not coord.size:
                continue
            if coord.min() < lo - slack or coord.max() > hi + slack:
                raise ChartError(f"{what} leaves the chart: {axis} spans [{coord.min():.6g}, {coord.max():.6g}]"
                                 f" outside [{lo:.6g}, {hi:.6g}]")

    def probe_points(self, n: int = PROBE_GRID) -> tuple[np.ndarray, np.ndarray]:
        """Cell centres of an n-by-n grid (never on the chart edges)."""
        su = self.u_min + (np.arange(n) + 0.5) * (self.u_max - self.u_min) / n
        sv = self.v_min + (np.arange(n) + 0.5) * (self.v_max - self.v_min) / n
        U, V = np.meshgrid(su, sv, indexing="ij")
        return U.ravel(), V.ravel()

    def random_points(self, rng: np.random.Generator, n: int, margin: float = 0.05):
        du = (self.u_max - self.u_min) * margin
        dv = (self.v_max - self.v_min) * margin
        u = rng.uniform(self.u_min + du, self.u_max - du, n)
        v = rng.uniform(self.v_min + dv, self.v_max - dv, n)
        return u, v


@dataclass(frozen=True)
class SingularLocus:
    """Coordinate lines ``u = c`` / ``v = c`` and isolated points to keep away from."""

    u_lines: tuple[float, ...] = ()
    v_lines: tuple[float, ...] = ()
    points: tuple[tuple[float, float], ...] = ()

    def distance(self, u, v) -> np.ndarray:
        u, v = np.asarray(u, float), np.asarray(v, float)
        d = np.full(np.broadcast(u, v).shape, np.inf)
        for c in self.u_lines:
            d = np.minimum(d, np.abs(u - c))
        for c in self.v_lines:
            d = np.minimum(d, np.abs(v - c))
        for pu, pv in self.points:
            d = np.minimum(d, np.hypot(u - pu, v - pv))
        return d

    def check(self, u, v, delta: float = SINGULAR_DELTA, what: str = "curve") -> None:
        d = self.distance(u, v)
        if d.size and np.min(d) < delta:
            k = int(np.argmin(d))
            raise SingularLocusError(
                f"{what} passes within {np.min(d):.3g} of the singular locus "
                f"at ({np.ravel(u)[k]:.6g}, {np.ravel(v)[k]:.6g})"
            )

    def check_path(self, u, v, delta: float = SINGULAR_DELTA, what: str = "curve") -> None:
        """Like :meth:`check` for ordered samples, also catching lines crossed between samples."""
        self.check(u, v, delta, what)
        u, v = np.ravel(u), np.ravel(v)
        for coord, lines, axis in ((u, self.u_lines, "u"), (v, self.v_lines, "v")):
            for c in lines:
                side = np.sign(coord - c)
                if np.any(side[1:] * side[:-1] < 0):
                    raise SingularLocusError(f"{what} crosses the singular line {axis} = {c:.6g}")

    def __bool__(self) -> bool:
        return bool(self.u_lines or self.v_lines or self.points)


def _validate_metric(chart, singular, E, F, G, what="metric"):
    u, v = chart.probe_points()
    keep = singular.distance(u, v) >= SINGULAR_DELTA
    u, v = u[keep], v[keep]
    jE, jF, jG = evaluate_many([E, F, G], {"u": u, "v": v})
    e, f, g = jE.value, jF.value, jG.value
    det = e * g - f * f
    worst = np.minimum(np.minimum(e, g), det)
    k = int(np.argmin(worst))
    if worst[k] <= 0:
        raise DegenerateMetricError(
            f"{what} is not positive definite at ({u[k]:.6g}, {v[k]:.6g}): "
            f"E={e[k]:.6g}, F={f[k]:.6g}, G={g[k]:.6g}, EG-F^2={det[k]:.6g}"
        )


@dataclass(frozen=True)
class MetricPatch:
    """First fundamental form ``E du^2 + 2F du dv + G dv^2`` on a chart."""

    chart: Chart
    E: Expr
    F: Expr
    G: Expr
    singular: SingularLocus = field(default_factory=SingularLocus)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        for name in ("E", "F", "G"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        if self.validate:
            _validate_metric(self.chart, self.singular, self.E, self.F, self.G)

    @property
    def det(self) -> Expr:
        return self.E * self.G - self.F * self.F

    def inner(self, V: VectorField, W: VectorField) -> Expr:
        return inner(self, V, W)

    def inner_at(self, u, v, V: np.ndarray, W: np.ndarray) -> np.ndarray:
        """Inner products of component arrays of shape (2, N) at points."""
        jE, jF, jG = evaluate_many([self.E, self.F, self.G], {"u": u, "v": v})
        return (
            jE.value * V[0] * W[0]
            + jF.value * (V[0] * W[1] + V[1] * W[0])
            + jG.value * V[1] * W[1]
        )

    def probe_points(self, n: int = PROBE_GRID):
        u, v = self.chart.probe_points(n)
        keep = self.singular.distance(u, v) >= SINGULAR_DELTA
        return u[keep], v[keep]


def inner(m: MetricPatch, V: VectorField, W: VectorField) -> Expr:
    return m.E * V.a * W.a + m.F * (V.a * W.b + V.b * W.a) + m.G * V.b * W.b


@dataclass(frozen=True)
class Embedding:
    """A parametrised surface ``(x, y, z)(u, v)`` in Euclidean 3-space."""

    chart: Chart
    x: Expr
    y: Expr
    z: Expr
    singular: SingularLocus = field(default_factory=SingularLocus)

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))

    @property
    def components(self) -> tuple[Expr, Expr, Expr]:
        return (self.x, self.y, self.z)

    def tangent(self, var: str) -> tuple[Expr, Expr, Expr]:
        return tuple(c.diff(var) for c in self.components)

    def position(self, u, v) -> np.ndarray:
        jets = evaluate_many(self.components, {"u": u, "v": v})
        return np.stack([j.value for j in jets])


def induced_metric(emb: Embedding) -> MetricPatch:
    """Pull back the Euclidean dot product: E = r_u.r_u, F = r_u.r_v, G = r_v.r_v."""
    ru = emb.tangent("u")
    rv = emb.tangent("v")
    E = ru[0] * ru[0] + ru[1] * ru[1] + ru[2] * ru[2]
    F = ru[0] * rv[0] + ru[1] * rv[1] + ru[2] * rv[2]
    G = rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]
    try:
        return MetricPatch(emb.chart, E, F, G, emb.singular)
    except DegenerateMetricError as exc:
        raise DegenerateMetricError(f"degenerate immersion: {exc}") from None


@dataclass(frozen=True)
class Frame:
    """Positively oriented orthonormal frame ``(X, Y)``."""

    X: VectorField
    Y: VectorField
    orientation: int = 1
    flipped: bool = False

    def components_at(self, u, v) -> tuple[np.ndarray, np.ndarray]:
        jets = evaluate_many([self.X.a, self.X.b, self.Y.a, self.Y.b], {"u": u, "v": v})
        X = np.stack([jets[0].value, jets[1].value])
        Y = np.stack([jets[2].value, jets[3].value])
        return X, Y

    def orthonormality_defect(self, m: MetricPatch, u, v) -> float:
        X, Y = self.components_at(u, v)
        return float(
            np.max(
                np.abs(
                    np.concatenate(
                        [
                            m.inner_at(u, v, X, X) - 1.0,
                            m.inner_at(u, v, X, Y),
                            m.inner_at(u, v, Y, Y) - 1.0,
                        ]
                    )
                )
            )
        )

    def check(self, m: MetricPatch, tol: float = 1e-10) -> None:
        u, v = m.probe_points()
        defect = self.orthonormality_defect(m, u, v)
        if defect > tol:
            raise FrameError(f"frame is not orthonormal: defect {defect:.3g} > {tol:g}")
        X, Y = self.components_at(u, v)
        if np.any(X[0] * Y[1] - X[1] * Y[0] <= 0):
            raise FrameError("frame is not positively oriented")


def gram_schmidt_frame(
    m: MetricPatch,
    X1: VectorField | None = None,
    Y1: VectorField | None = None,
    check: bool = True,
) -> Frame:
    """Orthonormalise ``(X1, Y1)`` (default: the coordinate fields).

    ``X = X1 / |X1|`` and ``Y`` is the unit component of ``Y1`` orthogonal to
    ``X1``, scaled by ``|X1| / sqrt(gram)``.  A negatively oriented input pair
    has ``Y`` negated so that the frame is positive w.r.t. ``du^dv``.
    """
    X1 = X1 if X1 is not None else VectorField.coordinate("u")
    Y1 = Y1 if Y1 is not None else VectorField.coordinate("v")
    n11 = inner(m, X1, X1)
    n12 = inner(m, X1, Y1)
    n22 = inner(m, Y1, Y1)
    gram = n11 * n22 - n12 * n12

    u, v = m.probe_points()
    jg, ja, jb, jc, jd = evaluate_many([gram, X1.a, X1.b, Y1.a, Y1.b], {"u": u, "v": v})
    if np.any(jg.value <= 0):
        k = int(np.argmin(jg.value))
        raise FrameError(f"seed fields are linearly dependent near ({u[k]:.6g}, {v[k]:.6g})")
    sign = np.sign(ja.value * jd.value - jb.value * jc.value)
    if np.any(sign != sign[0]):
        raise FrameError("seed fields change orientation inside the chart")

    X = X1 * (1.0 / sqrt(n11))
    Y = (sqrt(n11) / sqrt(gram)) * (Y1 - X1 * (n12 / n11))
    flipped = bool(sign[0] < 0)
    if flipped:
        log.warning("seed pair is negatively oriented; negating Y")
        Y = -Y
    frame = Frame(X, Y, orientation=1, flipped=flipped)
    if check:
        frame.check(m)
    return frame


def area_form(m: MetricPatch) -> TwoForm:
    """``dA = sqrt(EG - F^2) du^dv``."""
    return TwoForm(sqrt(m.det))


def total_area(m: MetricPatch, tol: float = 1e-10) -> float:
    from .quadrature import integrate_rectangle

    c = m.chart
    dA = area_form(m).c
    value, _ = integrate_rectangle(
        lambda u, v: evaluate_many([dA], {"u": u, "v": v})[0].value,
        (c.u_min, c.u_max, c.v_min, c.v_max),
        tol,
    )
    return value

