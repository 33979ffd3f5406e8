"""Jacobi-equation checks and rigid variations of curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..curves import SampledCurve, d_dt, integrate_bishop
from ..curves.sampled import covariant_derivative
from ..errors import NotGeodesic
from ..manifold import FrameField, MetricChart
from ..manifold.chart import _christoffel
from ..tolerances import DEFAULT
from .jets import Jet2D
from .killing import _tangent_rotation, killing_transport, q_from_coefficients, surface_coefficients

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def transported_vector(chart: MetricChart, curve: SampledCurve, path: np.ndarray, frame: str, frame_field=None) -> np.ndarray:
    """Coordinate components of ``X`` from a jet path in the given frame."""
    if frame == "tangent":
        return path[:, 0:1] * curve.tangent + path[:, 1:2] * curve.normal
    E = (frame_field or FrameField(chart)).E(curve.points)
    return np.einsum("sai,si->sa", E, path[:, :2])


@dataclass
class JacobiCheck:
    residual: float
    t: np.ndarray
    path: np.ndarray  # transported jet in the requested frame
    X: np.ndarray  # coordinate components


def jacobi_check(
    chart: MetricChart,
    geodesic: SampledCurve,
    jet0,
    frame: str = "tangent",
    geodesic_kappa: float = DEFAULT.geodesic_kappa,
) -> JacobiCheck:
    """Residual ``max |∇_T∇_T X - R(T, X) T|`` of the transported ``X`` along a geodesic.

    Raises
    ------
    NotGeodesic
        If the measured geodesic curvature exceeds ``geodesic_kappa``.
    """
    kmax = float(np.max(np.abs(geodesic.kappa)))
    if kmax > geodesic_kappa:
        raise NotGeodesic(f"curve has geodesic curvature up to {kmax:.3e} (limit {geodesic_kappa:g})")
    path, _ = killing_transport(chart, geodesic, jet0, frame)
    X = transported_vector(chart, geodesic, path, frame)
    P, T = geodesic.points, geodesic.tangent
    dX = covariant_derivative(chart, P, T, X, geodesic.dt)
    ddX = covariant_derivative(chart, P, T, dX, geodesic.dt)
    R = chart.riemann(P)
    RTXT = np.einsum("sabcd,sb,sc,sd->sa", R, T, T, X)
    g = chart.metric(P)
    diff = ddX - RTXT
    res = np.sqrt(np.einsum("sa,sab,sb->s", diff, g, diff))
    return JacobiCheck(float(np.max(res)), geodesic.t.copy(), path, X)


@dataclass
class RigidFamily:
    """Curves ``gamma_tau`` sharing the geodesic curvature of ``base``."""

    base: SampledCurve
    taus: np.ndarray
    curves: list
    jet0: np.ndarray
    frame: str
    dtau: float
    start_frames: np.ndarray


def _transversal_frames(chart, x0, F0, jet_chart, taus, steps=16, frame_field=None):
    """Carry the start point and frame ``(T, N)`` along the transversal curve.

    The transversal ``c`` follows the transported field itself,
    ``c' = X(c)``, with the jet Killing-transported along ``c`` and the frame
    propagated by ``∇_X F = A F``, ``A = -xi12 J``.  For a genuine Killing
    field ``c`` is its flow line, so the members are exact isometric images.
    """
    frame_field = frame_field or FrameField(chart)

    def rhs(y):
        x, xi, F = y[:2], y[2:5], y[5:].reshape(2, 2)
        g, dg = chart.metric_jet(x, 1)
        gam = _christoffel(g, dg)[0]
        E = frame_field.frame_from_metric(x, g)
        V = E @ xi[:2]
        Q = q_from_coefficients(*surface_coefficients(chart, x, V, frame_field))
        A = -xi[2] * (E @ _J @ np.linalg.inv(E))
        dF = -np.einsum("abc,b,cj->aj", gam, V, F) + A @ F
        return np.concatenate([V, Q @ xi, dF.ravel()])

    out = []
    for tau in taus:
        y = np.concatenate([x0, jet_chart, F0.ravel()])
        if tau != 0.0:
            h = tau / steps
            for _ in range(steps):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append((y[:2], y[5:].reshape(2, 2)))
    return out


def rigid_variation(
    chart: MetricChart,
    curve: SampledCurve,
    jet0,
    dtau: float,
    frame: str = "tangent",
    frame_field: FrameField | None = None,
    reorthonormalize_every: int = DEFAULT.reorthonormalize_every,
) -> RigidFamily:
    """The rigid variation generated by ``jet0`` at ``curve(0)``, at ``tau = -dtau, 0, dtau``.

    The start point moves along the integral curve of the transported
    ``X`` through ``curve(0)``; the start frames are carried along it by
    ``∇_X F = A F`` and each member is rebuilt from the base curve's
    geodesic curvature with the Bishop integrator.
    """
    j0 = jet0.as_array() if isinstance(jet0, Jet2D) else np.asarray(jet0, dtype=float)
    x0 = curve.points[0]
    F0 = np.column_stack([curve.tangent[0], curve.normal[0]])
    if frame == "tangent":
        jet_chart = _tangent_rotation(chart, x0, curve.tangent[0], frame_field) @ j0
    else:
        jet_chart = j0
    taus = np.array([-dtau, 0.0, dtau])
    starts = _transversal_frames(chart, x0, F0, jet_chart, taus, frame_field=frame_field)
    kappa = CubicSpline(curve.t_fine, curve.kappa_fine)
    xs0 = np.stack([s[0] for s in starts])
    Fs0 = np.stack([s[1] for s in starts])
    M = curve.samples
    xs, Fs, _ = integrate_bishop(chart, xs0, Fs0, [kappa], curve.length, 2 * M, reorthonormalize_every)
    curves = [SampledCurve(chart, curve.t_fine, xs[:, b], Fs[:, b, :, 0], closed=False) for b in range(3)]
    return RigidFamily(curve, taus, curves, j0, frame, float(dtau), Fs0)


def variation_field(family: RigidFamily) -> np.ndarray:
    """Central difference ``(gamma_dtau - gamma_-dtau) / (2 dtau)`` at the nodes."""
    minus, plus = family.curves[0], family.curves[2]
    return (plus.points - minus.points) / (2 * family.dtau)
