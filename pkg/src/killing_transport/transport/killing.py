"""Killing transport: the generalised Jacobi system along curves and its holonomy."""

from __future__ import annotations

import numpy as np

from .._kernels import rk4_linear
from ..curves import SampledCurve
from ..errors import NotClosed
from ..exprcore import gradient
from ..manifold import FrameField, MetricChart
from ..manifold.chart import _christoffel, _riemann
from ..manifold.geometry import _gauss_from_jet, gauss_curvature
from ..tolerances import DEFAULT
from .jets import Jet2D, JetND, TransportMatrix

FRAMES = ("chart", "tangent")


def _check_frame(frame: str) -> None:
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")


def surface_coefficients(chart: MetricChart, X: np.ndarray, V: np.ndarray, frame: FrameField | None = None):
    """``(omega21(V), (omega1(V), omega2(V)), K)`` at points ``X`` for velocities ``V``."""
    frame = frame or FrameField(chart)
    g, dg, ddg = chart.metric_jet(X, 2)
    K = _gauss_from_jet(g, dg, ddg)
    E = frame.frame_from_metric(X, g)
    om = np.linalg.solve(E, V[..., None])[..., 0]
    w = np.einsum("...a,...a->...", frame.omega21(X), V)
    return w, om, K


def q_from_coefficients(w, om, K) -> np.ndarray:
    """Assemble ``Q`` with ``U' = Q U`` from the coefficient arrays."""
    w = np.asarray(w, dtype=float)
    Q = np.zeros(w.shape + (3, 3))
    o1, o2 = om[..., 0], om[..., 1]
    Q[..., 0, 1] = -w
    Q[..., 0, 2] = o2
    Q[..., 1, 0] = w
    Q[..., 1, 2] = -o1
    Q[..., 2, 0] = -K * o2
    Q[..., 2, 1] = K * o1
    return Q


def _curve_q(chart: MetricChart, curve: SampledCurve, frame: FrameField | None) -> np.ndarray:
    w, om, K = surface_coefficients(chart, curve.x_fine, curve.T_fine, frame)
    return q_from_coefficients(w, om, K)


def q_matrix(chart: MetricChart, curve: SampledCurve, t: float, frame: FrameField | None = None) -> np.ndarray:
    """The 3x3 coefficient matrix of the transport system at parameter ``t``.

    ``t`` must be one of the curve's fine sample parameters (nodes or
    midpoints), where position and velocity are known exactly.
    """
    k = int(np.argmin(np.abs(curve.t_fine - t)))
    if abs(curve.t_fine[k] - t) > 1e-9 * max(1.0, curve.length):
        raise ValueError(f"t = {t} is not a sample of the curve")
    w, om, K = surface_coefficients(chart, curve.x_fine[k], curve.T_fine[k], frame)
    return q_from_coefficients(w, om, K)


def tangent_frame_q(kappa, K) -> np.ndarray:
    """Transport matrix in the ``(T, N)`` frame: rows ``(0, k, 0), (-k, 0, -1), (0, K, 0)``."""
    kappa = np.asarray(kappa, dtype=float)
    Q = np.zeros(kappa.shape + (3, 3))
    Q[..., 0, 1] = kappa
    Q[..., 1, 0] = -kappa
    Q[..., 1, 2] = -1.0
    Q[..., 2, 1] = K
    return Q


def _tangent_rotation(chart: MetricChart, X: np.ndarray, T: np.ndarray, frame: FrameField | None) -> np.ndarray:
    """``P`` with ``jet_chart = P @ jet_tangent`` (block rotation, ``xi12`` fixed)."""
    frame = frame or FrameField(chart)
    c = np.linalg.solve(frame.E(X), T[..., None])[..., 0]
    P = np.zeros(X.shape[:-1] + (3, 3))
    P[..., 0, 0] = c[..., 0]
    P[..., 0, 1] = -c[..., 1]
    P[..., 1, 0] = c[..., 1]
    P[..., 1, 1] = c[..., 0]
    P[..., 2, 2] = 1.0
    return P


def transport_matrix(chart: MetricChart, curve: SampledCurve, frame: str = "chart", frame_field: FrameField | None = None) -> TransportMatrix:
    """``U(t)`` at the curve nodes, in the chart frame or the ``(T, N)`` frame."""
    _check_frame(frame)
    if chart.dim != 2:
        raise ValueError("the 3x3 transport system is defined for surfaces")
    Q = _curve_q(chart, curve, frame_field)
    U = rk4_linear(Q[::2], Q[1::2], curve.dt, np.eye(3))
    if frame == "tangent":
        P = _tangent_rotation(chart, curve.points, curve.tangent, frame_field)
        U = np.swapaxes(P, -1, -2) @ U @ P[0]
    U[0] = np.eye(3)
    return TransportMatrix(curve.t.copy(), U, frame)


def killing_transport(
    chart: MetricChart,
    curve: SampledCurve,
    jet0,
    frame: str = "chart",
    frame_field: FrameField | None = None,
):
    """Transport the jet ``(xi1, xi2, xi12)`` along ``curve``.

    Parameters
    ----------
    jet0 : Jet2D or array-like of length 3
        Initial jet, in the frame named by ``frame``.
    frame : {"chart", "tangent"}
        ``"chart"`` uses the chart's Gram-Schmidt frame field, ``"tangent"``
        the moving frame ``(T, N)`` of the curve.

    Returns
    -------
    path : (M+1, 3) array
        The transported jet at the curve nodes, in the same frame.
    U : TransportMatrix
    """
    j0 = jet0.as_array() if isinstance(jet0, Jet2D) else np.asarray(jet0, dtype=float)
    U = transport_matrix(chart, curve, frame, frame_field)
    return U.U @ j0, U


def transport_tangent_direct(chart: MetricChart, curve: SampledCurve, jet0) -> np.ndarray:
    """Integrate the ``(T, N)``-frame system directly from the measured ``kappa``."""
    j0 = jet0.as_array() if isinstance(jet0, Jet2D) else np.asarray(jet0, dtype=float)
    K = gauss_curvature(chart, curve.x_fine)
    Q = tangent_frame_q(curve.kappa_fine, K)
    return rk4_linear(Q[::2], Q[1::2], curve.dt, j0[:, None])[..., 0]


def holonomy(
    chart: MetricChart,
    loop: SampledCurve,
    frame: str = "chart",
    frame_field: FrameField | None = None,
    closure: float = DEFAULT.closure,
) -> TransportMatrix:
    """Holonomy ``U(L)`` of Killing transport around a closed curve.

    Raises
    ------
    NotClosed
        If the end point is farther than ``closure`` from the start.
    """
    gap = loop.closure_distance()
    if gap > closure:
        raise NotClosed(f"curve does not close: end point is {gap:.3e} from the start (tolerance {closure:g})")
    return transport_matrix(chart, loop, frame, frame_field)


# --- small loops ----------------------------------------------------------------


def _segment_transport(chart, start, velocity, steps, frame_field):
    s = np.linspace(0.0, 1.0, 2 * steps + 1)
    X = start + s[:, None] * velocity
    V = np.broadcast_to(velocity, X.shape)
    Q = q_from_coefficients(*surface_coefficients(chart, X, V, frame_field))
    return rk4_linear(Q[::2], Q[1::2], 1.0 / steps, np.eye(3))[-1]


def coordinate_square_holonomy(chart, p, du, dv, steps=64, frame_field=None) -> np.ndarray:
    """Transport around the coordinate rectangle with corner ``p`` (counter-clockwise)."""
    p = np.asarray(p, dtype=float)
    U = np.eye(3)
    corner = p.copy()
    for vel in (np.array([du, 0.0]), np.array([0.0, dv]), np.array([-du, 0.0]), np.array([0.0, -dv])):
        U = _segment_transport(chart, corner, vel, steps, frame_field) @ U
        corner = corner + vel
    return U


def curvature_defect(chart: MetricChart, p, h: float, steps: int = 64, frame_field: FrameField | None = None) -> np.ndarray:
    """``(U_loop - I) / area`` for a small square loop with corner ``p``.

    The loop is the coordinate rectangle whose sides have metric length
    ``h`` at ``p``; ``area`` is its metric area.  The leading term lives in
    the ``xi12`` row and equals ``-(K1, K2, 0)`` in the repository's
    orientation convention (positive loops, ``R(e1, e2) = -K J``).
    """
    p = np.asarray(p, dtype=float)
    g = chart.metric(p)
    du, dv = h / np.sqrt(g[0, 0]), h / np.sqrt(g[1, 1])
    U = coordinate_square_holonomy(chart, p, du, dv, steps, frame_field)
    area = np.sqrt(np.linalg.det(g)) * du * dv
    return (U - np.eye(3)) / area


# --- n-dimensional formulation ----------------------------------------------------


def nd_system(chart: MetricChart, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Coefficient matrix of ``y = (X, vec A)`` for ``∇_T X = A T``, ``∇_T A = R(T, X)``.

    Coordinate components; ``vec`` is row-major.
    """
    n = chart.dim
    g, dg, ddg = chart.metric_jet(X, 2)
    gam, ginv, low = _christoffel(g, dg)
    dlow = 0.5 * (
        np.einsum("...dbec->...debc", ddg) + np.einsum("...dceb->...debc", ddg) - ddg
    )
    dginv = -np.einsum("...ap,...dpq,...qe->...dae", ginv, dg, ginv)
    dgam = np.einsum("...dae,...ebc->...dabc", dginv, low) + np.einsum("...ae,...debc->...dabc", ginv, dlow)
    R = _riemann(gam, dgam)
    G = np.einsum("...abc,...b->...ac", gam, T)  # G[a, c] = Γ^a_bc T^b
    eye = np.eye(n)
    d = n + n * n
    M = np.zeros(X.shape[:-1] + (d, d))
    M[..., :n, :n] = -G
    # d X^a / dt gets A^a_b T^b
    M[..., :n, n:] = np.einsum("ap,...q->...apq", eye, T).reshape(X.shape[:-1] + (n, n * n))
    # d A^a_b / dt = -G[a, e] A^e_b + A^a_e G[e, b] + R^a_bcd T^c X^d
    AA = -np.einsum("...ae,bf->...abef", G, eye) + np.einsum("ae,...fb->...abef", eye, G)
    M[..., n:, n:] = AA.reshape(X.shape[:-1] + (n * n, n * n))
    M[..., n:, :n] = np.einsum("...abcd,...c->...abd", R, T).reshape(X.shape[:-1] + (n * n, n))
    return M


def killing_transport_nd(chart: MetricChart, curve: SampledCurve, jet0: JetND, frame_field: FrameField | None = None):
    """Integrate ``∇_T X = A T``, ``∇_T A = R(T, X)`` in coordinates.

    Returns
    -------
    X : (M+1, n) array
        Coordinate components of the transported vector.
    A : (M+1, n, n) array
        Frame components of the transported endomorphism.
    skew_defect : float
        ``max ||A + A^T||`` along the curve (meaningful in skew mode).
    """
    n = chart.dim
    frame = frame_field or FrameField(chart)
    E0 = frame.E(curve.points[0])
    A0 = E0 @ jet0.A @ np.linalg.inv(E0)
    y0 = np.concatenate([jet0.X, A0.ravel()])
    Msys = nd_system(chart, curve.x_fine, curve.T_fine)
    Y = rk4_linear(Msys[::2], Msys[1::2], curve.dt, y0[:, None])[..., 0]
    Xs = Y[:, :n]
    Acoord = Y[:, n:].reshape(-1, n, n)
    E = frame.E(curve.points)
    Aframe = np.linalg.solve(E, Acoord @ E)
    skew = float(np.max(np.abs(Aframe + np.swapaxes(Aframe, -1, -2))))
    return Xs, Aframe, skew


def jet2d_to_nd(chart: MetricChart, p, jet: Jet2D, frame_field: FrameField | None = None) -> JetND:
    E = (frame_field or FrameField(chart)).E(np.asarray(p, dtype=float))
    return JetND(E @ jet.as_array()[:2], jet.A(), "skew")


def tilde_curvature_nd(chart: MetricChart, p, Y, Z, jet: JetND, frame_field: FrameField | None = None):
    """Curvature of the Killing-transport connection on ``(Y, Z)`` applied to a jet.

    Returns ``(zeros(n), B)`` where ``B`` (frame components) is::

        (∇_X R)(Y, Z) + [R(Y, Z), A] + R(Y, A Z) + R(A Y, Z)

    ``Y`` and ``Z`` are coordinate vectors; ``∇R`` is obtained by finite
    differences of the Riemann tensor.
    """
    p = np.asarray(p, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n = chart.dim
    frame = frame_field or FrameField(chart)
    E = frame.E(p)
    A = E @ jet.A @ np.linalg.inv(E)
    R = chart.riemann(p)
    dR = gradient(chart.riemann, p, 2 * chart.h)  # dR[e, a, b, c, d]
    gam = chart.christoffel(p)
    nabR = (
        dR
        + np.einsum("aef,fbcd->eabcd", gam, R)
        - np.einsum("feb,afcd->eabcd", gam, R)
        - np.einsum("fec,abfd->eabcd", gam, R)
        - np.einsum("fed,abcf->eabcd", gam, R)
    )
    nabXR = np.einsum("e,eabcd->abcd", jet.X, nabR)
    # bivectors make the result exactly antisymmetric in (Y, Z)
    W = np.outer(Y, Z) - np.outer(Z, Y)
    P = np.outer(Y, A @ Z) + np.outer(A @ Y, Z)
    RYZ = 0.5 * np.einsum("abcd,cd->ab", R, W)
    B = 0.5 * np.einsum("abcd,cd->ab", nabXR, W) + (RYZ @ A - A @ RYZ) + 0.5 * np.einsum("abcd,cd->ab", R, P - P.T)
    return np.zeros(n), np.linalg.solve(E, B @ E)
