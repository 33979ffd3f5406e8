from .jets import Jet2D, JetND, TransportMatrix, fixed_directions
from .killing import (
    coordinate_square_holonomy,
    curvature_defect,
    holonomy,
    jet2d_to_nd,
    killing_transport,
    killing_transport_nd,
    nd_system,
    q_from_coefficients,
    q_matrix,
    surface_coefficients,
    tangent_frame_q,
    tilde_curvature_nd,
    transport_matrix,
    transport_tangent_direct,
)
from .variation import JacobiCheck, RigidFamily, jacobi_check, rigid_variation, transported_vector, variation_field
