"""Per-triangle angle identities and the surface total."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..curves import SampledCurve
from ..errors import DegenerateVertexAngle
from ..manifold import FrameField, MetricChart, gauss_curvature
from ..tolerances import DEFAULT, Tolerances
from ..transport import Jet2D, transport_matrix
from .edges import EdgeReport, edge_formula, edge_jet
from .triangulation import Triangulation


def curvature_integral(chart: MetricChart, a, b, c, order: int = 16) -> float:
    """``∫∫ K dA`` over the coordinate triangle ``abc`` by Duffy-mapped Gauss-Legendre.

    The map ``(s, t) -> a + s (b - a) + s t (c - b)`` sends the unit square
    onto the triangle with Jacobian ``s det(b - a, c - b)``; the sign makes
    the result follow the vertex orientation.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = 0.5 * (x + 1), 0.5 * w
    S, T = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    P = a + S[..., None] * (b - a) + (S * T)[..., None] * (c - b)
    jac = S * ((b - a)[0] * (c - b)[1] - (b - a)[1] * (c - b)[0])
    K = gauss_curvature(chart, P)
    area = np.sqrt(np.linalg.det(chart.metric(P)))
    return float(np.sum(W * jac * K * area))


def _exterior_angle(a: np.ndarray, b: np.ndarray, tol: float) -> float:
    """Signed turn from orthonormal components ``a`` to ``b``, positive to the left."""
    cross = a[0] * b[1] - a[1] * b[0]
    dot = a @ b
    if 1.0 + dot <= tol:
        raise DegenerateVertexAngle(f"consecutive tangents are antiparallel (1 + cos = {1.0 + dot:.2e})")
    return float(np.arctan2(cross, dot))


@dataclass
class TriangleReport:
    """Angle bookkeeping for one positively oriented triangle.

    Attributes
    ----------
    exterior, interior
        Turning angles ``ε`` at the three vertices and ``ι = π - ε``.
    excess
        ``Σ ι - π``.
    boundary_omega
        ``∫ ω21`` over the boundary (the Stokes side).
    tau_sum
        ``Σ_α [τ(L⁻) - τ(0⁺)]`` measured from the tangents.
    angle_identity_residual
        ``|tau_sum - (2π - Σ ε)|``.
    total
        ``Σ_α [τ-change + correction + (π/2) m]``, the boundary integral of
        ``ω21`` rebuilt from the edge formula.
    """

    edges: list
    exterior: list
    interior: list
    excess: float
    boundary_omega: float
    tau_sum: float
    angle_identity_residual: float
    total: float
    edge_residual: float
    curvature_integral: float | None = None
    stokes_residual: float | None = None
    ambiguous_edges: int = 0

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "edges"}
        out["edges"] = [e.as_dict() for e in self.edges]
        return out


def _frame_components(frame: FrameField, X, T):
    return np.linalg.solve(frame.E(X), T)


def triangle_sum(
    chart: MetricChart,
    edges: list[SampledCurve],
    jets: list | None = None,
    frame_field: FrameField | None = None,
    tol: Tolerances = DEFAULT,
    reports: list[EdgeReport] | None = None,
    curvature: float | None = None,
) -> TriangleReport:
    """Edge identities and vertex angles around one triangle.

    Parameters
    ----------
    edges : list of three SampledCurve
        The boundary, positively oriented, each edge starting where the
        previous one ends.
    jets : list of Jet2D, optional
        Chart-frame jets at the edge starts; ``edge_jet`` is used otherwise.
    reports : list of EdgeReport, optional
        Precomputed edge reports (then ``jets`` is ignored).
    curvature : float, optional
        Independent value of ``∫∫ K dA`` for the Stokes residual.

    Raises
    ------
    DegenerateVertexAngle
        If consecutive tangents are antiparallel within ``tol.vertex_angle``.
    """
    if len(edges) != 3:
        raise ValueError("a triangle has three edges")
    frame = frame_field or FrameField(chart)
    ambiguous = 0
    if reports is None:
        reports = []
        for k, ed in enumerate(edges):
            U = transport_matrix(chart, ed, "chart", frame)
            if jets is not None and jets[k] is not None:
                jet = jets[k]
            else:
                ej = edge_jet(chart, ed, frame, tol.intersection, transport=U)
                ambiguous += ej.ambiguous
                jet = ej.jet
            reports.append(edge_formula(chart, ed, jet, frame, tol.edge_zero, transport=U))
    eps = []
    for k in range(3):
        prev, cur = edges[k - 1], edges[k]
        a = _frame_components(frame, prev.points[-1], prev.tangent[-1])
        b = _frame_components(frame, cur.points[0], cur.tangent[0])
        eps.append(_exterior_angle(a, b, tol.vertex_angle))
    iota = [np.pi - e for e in eps]
    tau_sum = float(sum(r.tau_change for r in reports))
    total = float(sum(r.tau_change + r.correction + r.m * np.pi / 2 for r in reports))
    boundary = float(sum(r.integral_omega for r in reports))
    return TriangleReport(
        edges=reports,
        exterior=eps,
        interior=iota,
        excess=float(sum(iota) - np.pi),
        boundary_omega=boundary,
        tau_sum=tau_sum,
        angle_identity_residual=float(abs(tau_sum - (2 * np.pi - sum(eps)))),
        total=total,
        edge_residual=float(max(abs(r.residual) for r in reports)),
        curvature_integral=curvature,
        stokes_residual=None if curvature is None else float(abs(boundary - curvature)),
        ambiguous_edges=int(ambiguous),
    )


@dataclass
class SurfaceReport:
    """Assembled totals over a closed triangulated surface."""

    total: float
    two_pi_chi: float
    residual: float
    angle_total: float
    quadrature_total: float | None
    counts: dict
    max_stokes_residual: float | None
    max_edge_residual: float
    max_angle_identity_residual: float
    max_cancellation: float
    m_cancellation_ok: bool
    ambiguous_edges: int
    triangles: list = field(default_factory=list)

    def as_dict(self, per_triangle: bool = False) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "triangles"}
        if per_triangle:
            out["triangles"] = [t.as_dict() for t in self.triangles]
        return out


def _triangle_corners(tri: Triangulation, refs) -> np.ndarray:
    """Unwrapped corners of a triangle following its edges from the first start."""
    corners = []
    for ref in refs:
        P = tri.edges[abs(ref) - 1].curve.points
        start, end = (P[0], P[-1]) if ref > 0 else (P[-1], P[0])
        if not corners:
            corners.append(start)
        corners.append(corners[-1] + (end - start))
    return np.stack(corners[:3])


def surface_sum(
    chart: MetricChart,
    triangulation: Triangulation,
    frame_field: FrameField | None = None,
    tol: Tolerances = DEFAULT,
    quadrature: bool = True,
    quadrature_order: int = 16,
) -> SurfaceReport:
    """Gauss-Bonnet total of a closed triangulated surface.

    Every edge gets one jet from ``edge_jet``; the same isometry is used by
    both adjacent triangles, forwards in one and backwards in the other.
    The reported ``total`` is the sum over triangles of the edge-formula
    rebuilt boundary integrals of ``ω21``; ``angle_total`` is
    ``Σ (Σ ι - π)`` and ``quadrature_total`` the independent
    ``Σ ∫∫ K dA`` (coordinate-straight triangles assumed).

    Raises
    ------
    NotClosed, InconsistentOrientation
        From :meth:`Triangulation.validate`.
    """
    triangulation.validate(closed=True)
    frame = frame_field or FrameField(chart)
    fwd, bwd = [], []
    ambiguous = 0
    cancel = 0.0
    m_ok = True
    for ed in triangulation.edges:
        U = transport_matrix(chart, ed.curve, "chart", frame)
        ej = edge_jet(chart, ed.curve, frame, tol.intersection, transport=U)
        ambiguous += ej.ambiguous
        rf = edge_formula(chart, ed.curve, ej.jet, frame, tol.edge_zero, transport=U)
        rb = edge_formula(chart, ed.curve.reversed(), Jet2D.from_array(rf.jet_end), frame, tol.edge_zero)
        cancel = max(cancel, abs(rf.correction + rb.correction), abs(rf.integral_omega + rb.integral_omega))
        m_ok &= rf.m == -rb.m
        fwd.append(rf)
        bwd.append(rb)
    reports = []
    for refs in triangulation.triangles:
        curves = [triangulation.edges[abs(r) - 1].directed(r) for r in refs]
        eds = [fwd[r - 1] if r > 0 else bwd[-r - 1] for r in refs]
        kint = None
        if quadrature:
            a, b, c = _triangle_corners(triangulation, refs)
            kint = curvature_integral(chart, a, b, c, quadrature_order)
        reports.append(triangle_sum(chart, curves, frame_field=frame, tol=tol, reports=eds, curvature=kint))
    total = float(sum(r.total for r in reports))
    two_pi_chi = 2 * np.pi * triangulation.chi
    quad = float(sum(r.curvature_integral for r in reports)) if quadrature else None
    return SurfaceReport(
        total=total,
        two_pi_chi=float(two_pi_chi),
        residual=float(abs(total - two_pi_chi)),
        angle_total=float(sum(r.excess for r in reports)),
        quadrature_total=quad,
        counts=triangulation.counts(),
        max_stokes_residual=float(max(r.stokes_residual for r in reports)) if quadrature else None,
        max_edge_residual=float(max(r.edge_residual for r in reports)),
        max_angle_identity_residual=float(max(r.angle_identity_residual for r in reports)),
        max_cancellation=float(cancel),
        m_cancellation_ok=bool(m_ok),
        ambiguous_edges=int(ambiguous),
        triangles=reports,
    )
