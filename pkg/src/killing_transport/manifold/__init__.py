from .chart import (
    BUILTINS,
    MetricChart,
    builtin,
    flat_torus,
    half_plane,
    metric_chart,
    perturbed_flat,
    plane,
    polar_plane,
    sphere,
    surface_of_revolution,
    torus,
)
from .geometry import (
    JET_FIELDS,
    CurvatureJet,
    Frame2D,
    FrameField,
    KillingResidual,
    VectorFieldJet,
    connection_coefficient,
    curvature_jet,
    curvature_jet_array,
    frame_riemann,
    gauss_curvature,
    gram_schmidt_frame,
    jet_residuals,
    killing_residual,
    orthonormal_frame,
)
