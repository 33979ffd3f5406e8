"""Arc-length sampled curves and frames along them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..manifold import MetricChart
from ..manifold.chart import _christoffel
from ..manifold.geometry import gram_schmidt_frame
from ..tolerances import DEFAULT

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotate_quarter(chart: MetricChart, X: np.ndarray, V: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    """Rotate tangent vectors by +90 degrees in the oriented metric ``g``."""
    g = chart.metric(X) if g is None else g
    E = gram_schmidt_frame(g)
    comps = np.linalg.solve(E, V[..., None])[..., 0]
    return np.einsum("...ai,...i->...a", E, comps @ _J.T)


def d_dt(values: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order derivative along axis 0 of uniformly spaced samples."""
    f = np.asarray(values, dtype=float)
    if len(f) < 5:
        raise ValueError("need at least 5 samples to differentiate")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dt)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dt)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dt)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * dt)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * dt)
    return out


def covariant_derivative(chart: MetricChart, X: np.ndarray, T: np.ndarray, V: np.ndarray, dt: float) -> np.ndarray:
    """``∇_T V`` for a vector field ``V`` sampled along a curve with velocity ``T``."""
    g, dg = chart.metric_jet(X, 1)
    gam = _christoffel(g, dg)[0]
    return d_dt(V, dt) + np.einsum("...abc,...b,...c->...a", gam, T, V)


@dataclass(frozen=True)
class FrameBundlePoint:
    """A point with an orthonormal frame ``(T, N_2, ..., N_n)`` as matrix columns."""

    point: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "frame", np.asarray(self.frame, dtype=float))

    @classmethod
    def from_tangent(cls, chart: MetricChart, p, w) -> "FrameBundlePoint":
        """Surface frame ``(T, N)`` with ``T`` along ``w`` and ``N`` its positive rotation."""
        p = np.asarray(p, dtype=float)
        g = chart.metric(p)
        w = np.asarray(w, dtype=float)
        T = w / np.sqrt(w @ g @ w)
        N = rotate_quarter(chart, p, T, g)
        return cls(p, np.column_stack([T, N]))

    def gram_error(self, chart: MetricChart) -> float:
        F = self.frame
        return float(np.max(np.abs(F.T @ chart.metric(self.point) @ F - np.eye(F.shape[1]))))

    def validate(self, chart: MetricChart, tol: float = 1e-10) -> None:
        err = self.gram_error(chart)
        if err > tol:
            raise ValueError(f"start frame is not orthonormal (Gram error {err:.2e})")


class SampledCurve:
    """An arc-length parameterised curve sampled on a uniform grid.

    The curve keeps ``2M + 1`` fine samples spaced ``dt / 2`` so that the
    RK4 transport on the ``M`` coarse intervals has its coefficients at the
    nodes and the exact midpoints.  Points are stored unwrapped.

    Attributes
    ----------
    t, points, tangent, normal, kappa
        Values at the ``M + 1`` nodes (``normal`` and ``kappa`` for surfaces).
    closed : bool
        Whether the end point coincides with the start (modulo periods).
    """

    def __init__(self, chart: MetricChart, t_fine, x_fine, T_fine, closed: bool | None = None, closure_tol: float = DEFAULT.closure):
        self.chart = chart
        self.t_fine = np.asarray(t_fine, dtype=float)
        self.x_fine = np.asarray(x_fine, dtype=float)
        self.T_fine = np.asarray(T_fine, dtype=float)
        if len(self.t_fine) % 2 != 1 or len(self.t_fine) < 5:
            raise ValueError("fine samples must number 2M+1 with M >= 2")
        self.closure_tol = closure_tol
        gap = self.closure_distance()
        self.closed = bool(gap <= closure_tol) if closed is None else bool(closed)
        if chart.dim == 2:
            self.N_fine = rotate_quarter(chart, self.x_fine, self.T_fine)
            acc = covariant_derivative(chart, self.x_fine, self.T_fine, self.T_fine, self.dt / 2)
            g = chart.metric(self.x_fine)
            self.kappa_fine = np.einsum("...a,...ab,...b->...", acc, g, self.N_fine)
        else:
            self.N_fine = None
            self.kappa_fine = None

    # --- grid -----------------------------------------------------------------

    @property
    def samples(self) -> int:
        return (len(self.t_fine) - 1) // 2

    @property
    def length(self) -> float:
        return float(self.t_fine[-1] - self.t_fine[0])

    @property
    def dt(self) -> float:
        return self.length / self.samples

    @property
    def t(self) -> np.ndarray:
        return self.t_fine[::2]

    @property
    def points(self) -> np.ndarray:
        return self.x_fine[::2]

    @property
    def tangent(self) -> np.ndarray:
        return self.T_fine[::2]

    @property
    def normal(self) -> np.ndarray | None:
        return None if self.N_fine is None else self.N_fine[::2]

    @property
    def kappa(self) -> np.ndarray | None:
        return None if self.kappa_fine is None else self.kappa_fine[::2]

    @property
    def mid_points(self) -> np.ndarray:
        return self.x_fine[1::2]

    @property
    def mid_tangent(self) -> np.ndarray:
        return self.T_fine[1::2]

    # --- checks -----------------------------------------------------------------

    def closure_distance(self) -> float:
        return self.chart.domain.distance(self.x_fine[0], self.x_fine[-1])

    def speed_error(self) -> float:
        g = self.chart.metric(self.x_fine)
        return float(np.max(np.abs(np.sqrt(np.einsum("...a,...ab,...b->...", self.T_fine, g, self.T_fine)) - 1)))

    def reversed(self) -> "SampledCurve":
        """The same curve traversed backwards; ``T``, ``N`` and ``kappa`` change sign."""
        out = SampledCurve.__new__(SampledCurve)
        out.chart = self.chart
        out.t_fine = self.t_fine[-1] - self.t_fine[::-1]
        out.x_fine = self.x_fine[::-1].copy()
        out.T_fine = -self.T_fine[::-1]
        out.closure_tol = self.closure_tol
        out.closed = self.closed
        out.N_fine = None if self.N_fine is None else -self.N_fine[::-1]
        out.kappa_fine = None if self.kappa_fine is None else -self.kappa_fine[::-1]
        return out

    def __repr__(self) -> str:
        return f"SampledCurve(length={self.length:.6g}, samples={self.samples}, closed={self.closed})"
