"""Adaptive composite Gauss-Legendre quadrature in one and two dimensions.

Both integrators refine level by level and evaluate every panel of a level in
one vectorised call, so integrands should accept arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

PANEL_ORDER = 16
MAX_DEPTH_1D = 12
MAX_DEPTH_2D = 10
# relative noise floor below which panel differences count as converged
ROUNDOFF = 1e-14


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its maximum depth without converging."""


@dataclass
class QuadratureInfo:
    panels: int = 0
    max_depth: int = 0
    evaluations: int = 0
    converged: bool = True

    def merge(self, other: "QuadratureInfo") -> "QuadratureInfo":
        return QuadratureInfo(
            self.panels + other.panels,
            max(self.max_depth, other.max_depth),
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    def as_dict(self) -> dict:
        return {
            "panels": self.panels,
            "max_depth": self.max_depth,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_sums(f, a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    t = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
    return half * (vals @ w)


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    order: int = PANEL_ORDER,
    max_depth: int = MAX_DEPTH_1D,
    strict: bool = True,
) -> tuple[float, QuadratureInfo]:
    """Integrate ``f`` over [a, b].

    A panel is accepted when its estimate and the sum over its two halves
    differ by less than ``tol`` times its share of the interval.
    """
    info = QuadratureInfo()
    if a == b:
        return 0.0, info
    lo = np.array([a], float)
    hi = np.array([b], float)
    coarse = _panel_sums(f, lo, hi, order)
    info.evaluations += order
    total = 0.0
    length = abs(b - a)
    depth = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        halves = _panel_sums(f, np.concatenate([lo, mid]), np.concatenate([mid, hi]), order)
        info.evaluations += 2 * order * lo.size
        left, right = halves[: lo.size], halves[lo.size :]
        fine = left + right
        share = np.abs(hi - lo) / length
        ok = np.abs(fine - coarse) <= np.maximum(tol * share, ROUNDOFF * np.abs(fine))
        depth += 1
        info.max_depth = depth
        if depth >= max_depth:
            if not np.all(ok):
                info.converged = False
                if strict:
                    raise QuadratureError(
                        f"1-D quadrature did not converge on [{a}, {b}] at depth {max_depth}"
                    )
            ok[:] = True
        total += float(np.sum(fine[ok]))
        info.panels += 2 * int(np.count_nonzero(ok))
        keep = ~ok
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
    return total, info


def _rect_sums(f, boxes: np.ndarray, order: int) -> np.ndarray:
    x, w = gauss_legendre(order)
    u0, u1, v0, v1 = boxes.T
    hu, hv = 0.5 * (u1 - u0), 0.5 * (v1 - v0)
    mu, mv = 0.5 * (u1 + u0), 0.5 * (v1 + v0)
    U = mu[:, None, None] + hu[:, None, None] * x[None, :, None]
    V = mv[:, None, None] + hv[:, None, None] * x[None, None, :]
    U, V = np.broadcast_arrays(U, V)
    vals = np.asarray(f(U.ravel(), V.ravel()), dtype=float).reshape(U.shape)
    return hu * hv * np.einsum("kij,i,j->k", vals, w, w)


def _quarter(boxes: np.ndarray) -> np.ndarray:
    u0, u1, v0, v1 = boxes.T
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    kids = [
        np.stack([u0, um, v0, vm], axis=1),
        np.stack([um, u1, v0, vm], axis=1),
        np.stack([u0, um, vm, v1], axis=1),
        np.stack([um, u1, vm, v1], axis=1),
    ]
    return np.stack(kids, axis=1)  # (n, 4, 4)


def integrate_rectangle(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rect: tuple[float, float, float, float],
    tol: float,
    order: int = PANEL_ORDER,
    max_depth: int = MAX_DEPTH_2D,
    strict: bool = True,
) -> tuple[float, QuadratureInfo]:
    """Adaptive tensor Gauss-Legendre over ``(u0, u1, v0, v1)`` by quadtree refinement."""
    info = QuadratureInfo()
    boxes = np.array([rect], float)
    area = (rect[1] - rect[0]) * (rect[3] - rect[2])
    coarse = _rect_sums(f, boxes, order)
    info.evaluations += order * order
    total = 0.0
    depth = 0
    while len(boxes):
        kids = _quarter(boxes)
        sums = _rect_sums(f, kids.reshape(-1, 4), order).reshape(-1, 4)
        info.evaluations += 4 * order * order * len(boxes)
        fine = sums.sum(axis=1)
        share = (boxes[:, 1] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 2]) / area
        ok = np.abs(fine - coarse) <= np.maximum(tol * share, ROUNDOFF * np.abs(fine))
        depth += 1
        info.max_depth = depth
        if depth >= max_depth:
            if not np.all(ok):
                info.converged = False
                if strict:
                    raise QuadratureError(
                        f"2-D quadrature did not converge on {rect} at depth {max_depth}"
                    )
            ok[:] = True
        total += float(np.sum(fine[ok]))
        info.panels += 4 * int(np.count_nonzero(ok))
        boxes = kids[~ok].reshape(-1, 4)
        coarse = sums[~ok].reshape(-1)
    return total, info
