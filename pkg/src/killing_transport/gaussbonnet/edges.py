"""Edge jets and the angle-evolution edge formula."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import simpson

from ..curves import SampledCurve, d_dt
from ..errors import IntersectionIllConditioned, ZeroAtInteriorUnresolved
from ..manifold import FrameField, MetricChart
from ..tolerances import DEFAULT
from ..transport import Jet2D, TransportMatrix, transport_matrix
from ..transport.killing import surface_coefficients


@dataclass
class EdgeJet:
    """A jet whose ``X`` is tangent to the edge at both ends (chart-frame components)."""

    jet: Jet2D
    jet_end: Jet2D
    cosines: tuple[float, float]
    ambiguous: bool
    normal_start: float
    normal_end: float


def _tangent_components(frame: FrameField, X, T):
    return np.linalg.solve(frame.E(X), T)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * np.sign(v[k])


def edge_jet(
    chart: MetricChart,
    edge: SampledCurve,
    frame_field: FrameField | None = None,
    intersection: float = DEFAULT.intersection,
    transport: TransportMatrix | None = None,
) -> EdgeJet:
    """Jet at the start of ``edge`` with ``X(0) ∥ γ'(0)`` and ``X(L) ∥ γ'(L)``.

    The plane ``V0 = span{(T(0), 0), (0, 0, 1)}`` is transported to the end
    and intersected with ``V_L`` through principal angles.  When the
    intersection is two-dimensional (``1 - cos`` of the second principal
    angle below ``intersection``) the start jet with the largest ``|X(0)|``
    is returned and the result is flagged ``ambiguous``.

    Raises
    ------
    IntersectionIllConditioned
        If the second principal angle is neither clearly zero nor clearly
        non-zero, i.e. ``intersection < 1 - cos < sqrt(intersection)``.
    """
    frame = frame_field or FrameField(chart)
    if transport is None:
        transport = transport_matrix(chart, edge, "chart", frame)
    U = transport.final
    t0 = _tangent_components(frame, edge.points[0], edge.tangent[0])
    tL = _tangent_components(frame, edge.points[-1], edge.tangent[-1])
    B0 = np.array([[t0[0], 0.0], [t0[1], 0.0], [0.0, 1.0]])
    BL = np.array([[tL[0], 0.0], [tL[1], 0.0], [0.0, 1.0]])
    Q0, _ = np.linalg.qr(U @ B0)
    Ua, s, _ = np.linalg.svd(Q0.T @ BL)
    gap = 1.0 - s[1]
    if gap <= intersection:
        ambiguous = True
        start = np.array([t0[0], t0[1], 0.0])
    elif gap < np.sqrt(intersection):
        raise IntersectionIllConditioned(
            f"second principal angle is borderline (1 - cos = {gap:.2e}); refine the edge sampling"
        )
    else:
        ambiguous = False
        end = Q0 @ Ua[:, 0]
        start = np.linalg.solve(U, end)
    start = _canonical_sign(start / np.linalg.norm(start))
    end = U @ start
    n0 = np.array([-t0[1], t0[0]])
    nL = np.array([-tL[1], tL[0]])
    return EdgeJet(
        Jet2D.from_array(start),
        Jet2D.from_array(end),
        (float(s[0]), float(s[1])),
        ambiguous,
        float(abs(start[:2] @ n0)),
        float(abs(end[:2] @ nL)),
    )


@dataclass
class EdgeReport:
    """Both sides of the edge formula for one directed edge.

    ``integral_omega - correction = theta_change = tau_change + (pi/2) m``.
    """

    integral_omega: float
    correction: float
    tau_change: float
    theta_change: float
    m: int
    m_real: float
    residual: float
    zeros: list = field(default_factory=list)
    zero_at_start: bool = False
    zero_at_end: bool = False
    jet: tuple = (0.0, 0.0, 0.0)
    jet_end: tuple = (0.0, 0.0, 0.0)
    replaced_samples: int = 0

    @property
    def is_integer(self) -> bool:
        return abs(self.residual) <= DEFAULT.edge_integer * 2 * np.pi

    def as_dict(self) -> dict:
        return asdict(self)


def _angle_with_zeros(xi: np.ndarray, zero: np.ndarray, dt: float) -> np.ndarray:
    """Continuous angle of ``X`` modulo pi; at zeros the direction of ``dX/dt``."""
    phi = np.arctan2(xi[:, 1], xi[:, 0])
    if np.any(zero):
        dxi = d_dt(xi, dt)
        phi[zero] = np.arctan2(dxi[zero, 1], dxi[zero, 0])
    return np.unwrap(phi, period=np.pi)


def edge_formula(
    chart: MetricChart,
    edge: SampledCurve,
    jet,
    frame_field: FrameField | None = None,
    edge_zero: float = DEFAULT.edge_zero,
    transport: TransportMatrix | None = None,
) -> EdgeReport:
    """Evaluate ``∫ω21 - ∫ xi12 r^-2 <X, γ'> dt = τ(L) - τ(0) + (π/2) m`` on one edge.

    Parameters
    ----------
    jet : Jet2D or array-like
        Chart-frame jet at the start of the edge.
    transport : TransportMatrix, optional
        Chart-frame fundamental solution along ``edge`` if already computed.

    Notes
    -----
    ``X = r (cos θ e1 + sin θ e2)`` with ``r`` allowed to change sign, so θ
    is continuous modulo π through zeros of ``X``.  Where
    ``|X| < edge_zero * max|X|`` the integrand is replaced by
    ``ω21(γ') - dθ/dt`` with θ differentiated numerically.

    Raises
    ------
    ZeroAtInteriorUnresolved
        If θ jumps by more than π/4 between neighbouring samples.
    """
    frame = frame_field or FrameField(chart)
    j0 = jet.as_array() if isinstance(jet, Jet2D) else np.asarray(jet, dtype=float)
    U = transport if transport is not None else transport_matrix(chart, edge, "chart", frame)
    path = U.U @ j0
    w, om, _ = surface_coefficients(chart, edge.x_fine, edge.T_fine, frame)
    integral_omega = float(simpson(w, x=edge.t_fine))
    t = edge.t
    xi, xi12 = path[:, :2], path[:, 2]
    r_abs = np.linalg.norm(xi, axis=1)
    scale = float(np.max(r_abs))
    zero = r_abs < edge_zero * scale if scale > 0 else np.ones(len(t), dtype=bool)
    theta = _angle_with_zeros(xi, zero, edge.dt)
    jumps = np.abs(np.diff(theta))
    if np.max(jumps) > np.pi / 4:
        k = int(np.argmax(jumps))
        raise ZeroAtInteriorUnresolved(
            f"angle of X jumps by {jumps[k]:.3f} between t = {t[k]:.6g} and {t[k + 1]:.6g}; "
            "increase the edge sampling"
        )
    om_n, w_n = om[::2], w[::2]
    with np.errstate(all="ignore"):
        integrand = xi12 * np.einsum("si,si->s", xi, om_n) / r_abs**2
    if np.any(zero):
        integrand[zero] = (w_n - d_dt(theta, edge.dt))[zero]
    correction = float(simpson(integrand, x=t))
    tau = np.unwrap(np.arctan2(om[:, 1], om[:, 0]))
    tau_change = float(tau[-1] - tau[0])
    m_real = (integral_omega - correction - tau_change) / (np.pi / 2)
    m = int(np.round(m_real))
    # signed r relative to the continuous direction; zeros are its sign changes
    r = np.einsum("si,si->s", xi, np.stack([np.cos(theta), np.sin(theta)], -1))
    zeros = []
    for k in range(len(t) - 1):
        if zero[k]:
            if 0 < k:
                zeros.append(float(t[k]))
        elif r[k] * r[k + 1] < 0 and not zero[k + 1]:
            zeros.append(float(t[k] - r[k] * (t[k + 1] - t[k]) / (r[k + 1] - r[k])))
    return EdgeReport(
        integral_omega=integral_omega,
        correction=correction,
        tau_change=tau_change,
        theta_change=float(theta[-1] - theta[0]),
        m=m,
        m_real=float(m_real),
        residual=float((m_real - m) * np.pi / 2),
        zeros=zeros,
        zero_at_start=bool(zero[0]),
        zero_at_end=bool(zero[-1]),
        jet=tuple(float(x) for x in path[0]),
        jet_end=tuple(float(x) for x in path[-1]),
        replaced_samples=int(np.count_nonzero(zero)),
    )
