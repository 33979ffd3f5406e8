from .builders import (
    curve_from_curvature,
    geodesic,
    geodesic_curvature,
    integrate_bishop,
    latitude,
    orthonormalize,
    param_curve,
    parallel_transport,
    reparam_arclength,
)
from .sampled import FrameBundlePoint, SampledCurve, covariant_derivative, d_dt, rotate_quarter
