"""Intrinsic geometry of surface patches: frames, connection forms, holonomy
and numerical Gauss-Bonnet checks."""

__version__ = "0.1.0"

from .catalog import get_surface, surface_names
from .connection import connection_form, curvature_form, gauge_transform, gauss_curvature
from .curves import PiecewiseCurve, circle, latitude, parse_curve, polygon
from .expr import eval_jet2, parse
from .geometry import MetricPatch, area_form, gram_schmidt_frame, induced_metric
from .transport import holonomy, transport_angle
from .verify import DomainSpec, integrate_curvature

__all__ = [
    "DomainSpec",
    "MetricPatch",
    "PiecewiseCurve",
    "area_form",
    "circle",
    "connection_form",
    "curvature_form",
    "eval_jet2",
    "gauge_transform",
    "gauss_curvature",
    "get_surface",
    "gram_schmidt_frame",
    "holonomy",
    "induced_metric",
    "integrate_curvature",
    "latitude",
    "parse",
    "parse_curve",
    "polygon",
    "surface_names",
    "transport_angle",
]
