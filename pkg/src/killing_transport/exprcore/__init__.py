"""Expression parsing and numerical differentiation of scalar fields."""

from .derivatives import (
    DerivativeResult,
    Domain,
    ScalarField,
    StencilSet,
    central_weights,
    gradient,
    partial_derivative,
    richardson_stencil,
)
from .parser import CHART_VARIABLES, Expr, evaluate, parse_expr, to_text

__all__ = [
    "CHART_VARIABLES",
    "DerivativeResult",
    "Domain",
    "Expr",
    "ScalarField",
    "StencilSet",
    "central_weights",
    "evaluate",
    "gradient",
    "parse_expr",
    "partial_derivative",
    "richardson_stencil",
    "to_text",
]
