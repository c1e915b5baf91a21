"""Built-in surfaces addressable by name and parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .expr import Var, cos, parse, sin
from .geometry import Chart, Embedding, MetricPatch, SingularLocus, induced_metric

__all__ = ["Surface", "SURFACES", "get_surface", "surface_names"]

u, v = Var("u"), Var("v")


@dataclass(frozen=True)
class Surface:
    name: str
    params: tuple[tuple[str, float], ...]
    metric: MetricPatch
    embedding: Embedding | None = None
    euler_char: int | None = None
    description: str = ""

    @property
    def chart(self) -> Chart:
        return self.metric.chart


def plane(extent: float = 10.0) -> Surface:
    chart = Chart(-extent, extent, -extent, extent)
    emb = Embedding(chart, u, v, 0.0)
    metric = MetricPatch(chart, 1.0, 0.0, 1.0)
    return Surface("plane", (("extent", extent),), metric, emb, None, "Euclidean plane")


_SPHERE_CHART = Chart(0.0, math.pi, 0.0, 2 * math.pi, periodic_v=True)
_POLES = SingularLocus(u_lines=(0.0, math.pi))


def _radial(rho) -> Embedding:
    return Embedding(
        _SPHERE_CHART,
        rho * sin(u) * cos(v),
        rho * sin(u) * sin(v),
        rho * cos(u),
        _POLES,
    )


def sphere(R: float = 1.0) -> Surface:
    """Round sphere in (theta, phi); the poles theta = 0, pi are singular."""
    R = float(R)
    metric = MetricPatch(_SPHERE_CHART, R * R, 0.0, R * R * sin(u) ** 2, _POLES)
    return Surface("sphere", (("R", R),), metric, _radial(R), 2, "round sphere of radius R")


def bumpy_sphere(R: float = 1.0, eps: float = 0.1, m: int = 3) -> Surface:
    """Radial graph ``R (1 + eps sin^3(theta) cos(m phi))`` over the sphere."""
    R, eps = float(R), float(eps)
    rho = R * (1.0 + eps * sin(u) ** 3 * cos(float(m) * v))
    emb = _radial(rho)
    return Surface(
        "bumpy_sphere",
        (("R", R), ("eps", eps), ("m", float(m))),
        induced_metric(emb),
        emb,
        2,
        "sphere with radial bumps",
    )


def torus(R: float = 2.0, r: float = 1.0) -> Surface:
    R, r = float(R), float(r)
    if not R > r > 0:
        raise ValueError("torus needs R > r > 0")
    chart = Chart(0.0, 2 * math.pi, 0.0, 2 * math.pi, periodic_u=True, periodic_v=True)
    emb = Embedding(chart, (R + r * cos(u)) * cos(v), (R + r * cos(u)) * sin(v), r * sin(u))
    metric = MetricPatch(chart, r * r, 0.0, (R + r * cos(u)) ** 2)
    return Surface("torus", (("R", R), ("r", r)), metric, emb, 0, "torus of revolution")


def poincare_disk(rho_max: float = 0.6) -> Surface:
    """Conformal metric ``4 (du^2 + dv^2) / (1 - u^2 - v^2)^2`` on a square."""
    rho_max = float(rho_max)
    if not 0 < rho_max < 1 / math.sqrt(2):
        raise ValueError("rho_max must lie in (0, 1/sqrt(2)) so the square fits in the disk")
    chart = Chart(-rho_max, rho_max, -rho_max, rho_max)
    lam = parse("4/(1-u^2-v^2)^2")
    metric = MetricPatch(chart, lam, 0.0, lam)
    return Surface("poincare_disk", (("rho_max", rho_max),), metric, None, None, "hyperbolic plane")


SURFACES: dict[str, Callable[..., Surface]] = {
    "plane": plane,
    "sphere": sphere,
    "bumpy_sphere": bumpy_sphere,
    "torus": torus,
    "poincare_disk": poincare_disk,
}


def surface_names() -> list[str]:
    return sorted(SURFACES)


def get_surface(name: str, **params) -> Surface:
    try:
        factory = SURFACES[name]
    except KeyError:
        raise KeyError(f"unknown surface {name!r}; known: {', '.join(surface_names())}") from None
    return factory(**params)
