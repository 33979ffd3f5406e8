"""Constructors for sampled curves: reparameterisation, geodesics, Bishop frames."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from .._kernels import rk4_linear
from ..errors import DomainExceeded, ZeroSpeed
from ..exprcore import StencilSet, parse_expr
from ..manifold import MetricChart
from ..manifold.chart import _christoffel
from ..tolerances import DEFAULT
from .sampled import FrameBundlePoint, SampledCurve

log = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_D1 = StencilSet([(1,)])


def _christoffel_at(chart: MetricChart, X: np.ndarray) -> np.ndarray:
    g, dg = chart.metric_jet(X, 1)
    return _christoffel(g, dg)[0]


def _raw_velocity(raw: Callable, s: np.ndarray, hs: float) -> np.ndarray:
    vals = _D1.apply(lambda S: raw(S[..., 0]), s[..., None], np.array([hs]))
    return vals[..., 0, :]


def reparam_arclength(
    chart: MetricChart,
    raw_curve: Callable,
    samples: int,
    s_range=(0.0, 1.0),
    velocity: Callable | None = None,
    closed: bool | None = None,
    zero_speed: float = DEFAULT.zero_speed,
    closure_tol: float = DEFAULT.closure,
) -> SampledCurve:
    """Resample a parameterised curve uniformly in arc length.

    Parameters
    ----------
    raw_curve : callable
        Vectorised map ``s -> points`` with ``s`` of shape ``(S,)`` and the
        result of shape ``(S, n)``.
    samples : int
        Number ``M`` of arc-length intervals.
    s_range : (float, float)
    velocity : callable, optional
        Exact ``ds`` derivative of ``raw_curve``; finite differences otherwise.

    Raises
    ------
    ZeroSpeed
        If the speed drops below ``zero_speed`` anywhere on the check grid.
    """
    a, b = map(float, s_range)
    M = int(samples)
    if M < 2 or not b > a:
        raise ValueError("need samples >= 2 and a non-empty parameter range")
    hs = 1e-4 * (b - a)
    vel = velocity if velocity is not None else (lambda s: _raw_velocity(raw_curve, np.asarray(s, float), hs))

    def speed(s):
        X = raw_curve(s)
        V = vel(s)
        return np.sqrt(np.einsum("...a,...ab,...b->...", V, chart.metric(X), V))

    panels = max(M, 64)
    edges = np.linspace(a, b, panels + 1)
    check = speed(np.linspace(a, b, 4 * panels + 1))
    if np.min(check) < zero_speed:
        k = int(np.argmin(check))
        raise ZeroSpeed(f"curve speed {check[k]:.2e} below {zero_speed:g} at parameter {a + k * (b - a) / (4 * panels):.6g}")

    def partial_length(lo, hi):
        mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
        s = mid[:, None] + rad[:, None] * _GL_NODES
        return rad * (speed(s.ravel()).reshape(s.shape) @ _GL_WEIGHTS)

    cum = np.concatenate([[0.0], np.cumsum(partial_length(edges[:-1], edges[1:]))])
    L = float(cum[-1])
    t_fine = np.linspace(0.0, L, 2 * M + 1)
    # invert S(s) = t by Newton from the piecewise-linear guess
    s = np.interp(t_fine, cum, edges)
    for _ in range(30):
        k = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, panels - 1)
        S = cum[k] + partial_length(edges[k], s)
        step = (S - t_fine) / speed(s)
        s = np.clip(s - step, a, b)
        if np.max(np.abs(step)) < 1e-15 * (b - a):
            break
    s[0], s[-1] = a, b
    X = raw_curve(s)
    V = vel(s)
    T = V / speed(s)[:, None]
    return SampledCurve(chart, t_fine, X, T, closed=closed, closure_tol=closure_tol)


def param_curve(chart: MetricChart, components: Sequence[str], samples: int, t_range=(0.0, 1.0), **kw) -> SampledCurve:
    """Curve from expression text in the variable ``t``, one per coordinate."""
    exprs = [parse_expr(c, variables=("t",)) for c in components]
    if len(exprs) != chart.dim:
        raise ValueError(f"need {chart.dim} components, got {len(exprs)}")

    def raw(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return np.stack([np.broadcast_to(e.evaluate({"t": s}), s.shape) for e in exprs], -1).astype(float)

    return reparam_arclength(chart, raw, samples, t_range, **kw)


def latitude(chart: MetricChart, u0: float, samples: int, v0: float = 0.0, turns: int = 1) -> SampledCurve:
    """The coordinate circle ``u = u0`` traversed ``turns`` times in ``+v``."""
    period = chart.domain.period[1] or 2 * np.pi

    def raw(s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.full_like(s, u0), v0 + s], -1)

    def vel(s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.zeros_like(s), np.ones_like(s)], -1)

    return reparam_arclength(chart, raw, samples, (0.0, turns * period), velocity=vel, closed=True)


def _with_parameter(fn, t):
    try:
        return fn()
    except DomainExceeded as exc:
        raise DomainExceeded(f"{exc} (curve parameter t = {t:.6g})", point=exc.point, parameter=float(t)) from None


def geodesic(chart: MetricChart, p, w, length: float, samples: int) -> SampledCurve:
    """Geodesic from ``p`` with initial direction ``w`` (normalised to unit speed).

    Integrated with classical RK4 at half the output spacing.

    Raises
    ------
    DomainExceeded
        With the parameter value at which the trajectory leaves the chart.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    w = w / np.sqrt(w @ chart.metric(p) @ w)
    M = int(samples)
    h = length / (2 * M)
    n = chart.dim

    def rhs(y):
        x, v = y[:n], y[n:]
        gam = _christoffel_at(chart, x)
        return np.concatenate([v, -np.einsum("abc,b,c->a", gam, v, v)])

    y = np.concatenate([p, w])
    out = np.empty((2 * M + 1, 2 * n))
    out[0] = y
    for i in range(2 * M):
        t = i * h

        def step():
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
            return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

        y = _with_parameter(step, t)
        out[i + 1] = y
    t_fine = np.linspace(0.0, length, 2 * M + 1)
    return SampledCurve(chart, t_fine, out[:, :n], out[:, n:])


def orthonormalize(chart: MetricChart, X: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt of the columns of ``F`` under ``g(X)`` (batched)."""
    g = chart.metric(X)
    F = F.copy()
    n = F.shape[-1]
    for j in range(n):
        for i in range(j):
            c = np.einsum("...a,...ab,...b->...", F[..., :, i], g, F[..., :, j])
            F[..., :, j] -= c[..., None] * F[..., :, i]
        nrm = np.sqrt(np.einsum("...a,...ab,...b->...", F[..., :, j], g, F[..., :, j]))
        F[..., :, j] /= nrm[..., None]
    return F


def _kappa_matrix(kappa_fns, t: float, n: int) -> np.ndarray:
    C = np.zeros((n, n))
    for i, k in enumerate(kappa_fns, start=1):
        val = float(k(t)) if callable(k) else float(k)
        C[i, 0] = val
        C[0, i] = -val
    return C


def integrate_bishop(
    chart: MetricChart,
    x0: np.ndarray,
    F0: np.ndarray,
    kappa_fns,
    length: float,
    steps: int,
    reorthonormalize_every: int = DEFAULT.reorthonormalize_every,
):
    """RK4 for ``x' = T``, ``∇_T T = sum k_i N_i``, ``∇_T N_i = -k_i T`` on a batch.

    ``x0`` has shape ``(B, n)`` and ``F0`` shape ``(B, n, n)``.  Returns the
    states at ``steps + 1`` uniform parameters and the largest Gram-Schmidt
    correction applied.
    """
    x = np.array(x0, dtype=float)
    F = np.array(F0, dtype=float)
    n = x.shape[-1]
    h = length / steps

    def rhs(x, F, t):
        gam = _christoffel_at(chart, x)
        C = _kappa_matrix(kappa_fns, t, n)
        dF = -np.einsum("...abc,...b,...cj->...aj", gam, F[..., :, 0], F) + F @ C
        return F[..., :, 0], dF

    xs = np.empty((steps + 1,) + x.shape)
    Fs = np.empty((steps + 1,) + F.shape)
    xs[0], Fs[0] = x, F
    correction = 0.0
    for i in range(steps):
        t = i * h

        def step():
            a1, b1 = rhs(x, F, t)
            a2, b2 = rhs(x + 0.5 * h * a1, F + 0.5 * h * b1, t + 0.5 * h)
            a3, b3 = rhs(x + 0.5 * h * a2, F + 0.5 * h * b2, t + 0.5 * h)
            a4, b4 = rhs(x + h * a3, F + h * b3, t + h)
            return x + (h / 6) * (a1 + 2 * a2 + 2 * a3 + a4), F + (h / 6) * (b1 + 2 * b2 + 2 * b3 + b4)

        x, F = _with_parameter(step, t)
        if reorthonormalize_every and (i + 1) % reorthonormalize_every == 0:
            G = orthonormalize(chart, x, F)
            correction = max(correction, float(np.max(np.abs(G - F))))
            F = G
        xs[i + 1], Fs[i + 1] = x, F
    if correction:
        log.debug("Bishop frame re-orthonormalisation: max correction %.3e", correction)
    return xs, Fs, correction


def curve_from_curvature(
    chart: MetricChart,
    start: FrameBundlePoint,
    kappa_fns,
    length: float,
    samples: int,
    reorthonormalize_every: int = DEFAULT.reorthonormalize_every,
):
    """Curve with prescribed Bishop curvatures ``kappa_2 .. kappa_n``.

    Parameters
    ----------
    start : FrameBundlePoint
        Initial point and orthonormal frame ``(T, N_2, ..., N_n)``.
    kappa_fns : callable, float or sequence of them
        Functions of the arc-length parameter ``t``.
    length : float
    samples : int

    Returns
    -------
    curve : SampledCurve
    frames : (M+1, n, n) array
        Bishop frames at the nodes.
    info : dict
        ``max_correction`` from periodic re-orthonormalisation.
    """
    n = chart.dim
    if callable(kappa_fns) or np.isscalar(kappa_fns):
        kappa_fns = [kappa_fns]
    if len(kappa_fns) != n - 1:
        raise ValueError(f"need {n - 1} curvature functions, got {len(kappa_fns)}")
    start.validate(chart, 1e-8)
    M = int(samples)
    xs, Fs, corr = integrate_bishop(
        chart, start.point[None], start.frame[None], kappa_fns, length, 2 * M, reorthonormalize_every
    )
    t_fine = np.linspace(0.0, length, 2 * M + 1)
    curve = SampledCurve(chart, t_fine, xs[:, 0], Fs[:, 0, :, 0])
    return curve, Fs[::2, 0], {"max_correction": corr}


def geodesic_curvature(chart: MetricChart, curve: SampledCurve) -> np.ndarray:
    """Geodesic curvature at the nodes, from ``∇_T T = kappa N``."""
    if chart.dim != 2:
        raise ValueError("geodesic curvature is defined here for surfaces")
    if curve.chart is not chart:
        curve = SampledCurve(chart, curve.t_fine, curve.x_fine, curve.T_fine)
    return curve.kappa.copy()


def parallel_transport(chart: MetricChart, curve: SampledCurve, V0) -> np.ndarray:
    """Parallel transport of coordinate vectors ``V0`` (``(n,)`` or ``(n, k)``)."""
    V0 = np.asarray(V0, dtype=float)
    Y0 = V0[:, None] if V0.ndim == 1 else V0
    gam = _christoffel_at(chart, curve.x_fine)
    Q = -np.einsum("sabc,sb->sac", gam, curve.T_fine)
    Y = rk4_linear(Q[::2], Q[1::2], curve.dt, Y0)
    return Y[..., 0] if V0.ndim == 1 else Y
