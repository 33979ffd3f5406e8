"""Killing transport along curves on Riemannian manifolds.

Subpackages
-----------
exprcore
    Expression parsing and finite-difference derivatives.
manifold
    Metric charts, frames, curvature and the curvature jet.
curves
    Arc-length sampled curves and their builders.
transport
    The linear transport of jets along curves, holonomy and variations.
gaussbonnet
    Edge jets, the edge angle formula and triangulation sums.
classify
    Rank classification of local infinitesimal isometries.
"""

from . import classify, curves, exprcore, gaussbonnet, manifold, transport
from ._kernels import BACKEND
from .errors import KillingTransportError
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEFAULT",
    "KillingTransportError",
    "Tolerances",
    "__version__",
    "classify",
    "curves",
    "exprcore",
    "gaussbonnet",
    "manifold",
    "transport",
]
