"""Gauss-Bonnet verification by Killing transport along triangle edges."""

from .edges import EdgeJet, EdgeReport, edge_formula, edge_jet
from .sums import SurfaceReport, TriangleReport, curvature_integral, surface_sum, triangle_sum
from .triangulation import (
    TriEdge,
    Triangulation,
    great_circle_edge,
    grid_triangulation,
    polyline_edge,
    sphere_coordinates,
    straight_edge,
)

__all__ = [
    "EdgeJet",
    "EdgeReport",
    "SurfaceReport",
    "TriEdge",
    "TriangleReport",
    "Triangulation",
    "curvature_integral",
    "edge_formula",
    "edge_jet",
    "great_circle_edge",
    "grid_triangulation",
    "polyline_edge",
    "sphere_coordinates",
    "straight_edge",
    "surface_sum",
    "triangle_sum",
]
