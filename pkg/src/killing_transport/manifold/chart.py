"""Single-chart Riemannian metrics and their coordinate derivatives."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from ..errors import DegenerateMetric, ExprError
from ..exprcore import Domain, Expr, ScalarField, StencilSet, parse_expr


@lru_cache(maxsize=None)
def _jet_stencil(n: int, order: int) -> StencilSet:
    unit = [tuple(int(a == b) for b in range(n)) for a in range(n)]
    orders = [(0,) * n] + unit
    if order >= 2:
        for a in range(n):
            for b in range(a, n):
                o = [0] * n
                o[a] += 1
                o[b] += 1
                orders.append(tuple(o))
    return StencilSet(orders)


class MetricChart:
    """A coordinate chart carrying a Riemannian metric.

    Parameters
    ----------
    components : mapping
        ``{(i, j): expr}`` for ``i <= j`` (0-based); missing off-diagonal
        entries are zero.  Values may be expression text, parsed ``Expr``
        trees or vectorised callables ``points -> values``.
    domain : Domain
    name : str
    h : float or sequence, optional
        Base finite-difference step per axis (default ``1e-3 * extent``).
    exact_curvature : callable, optional
        Closed-form Gaussian curvature, used only by tests and reports.
    spd_grid : int
        Points per axis on which positive definiteness is checked at load.
    """

    def __init__(
        self,
        components: Mapping,
        domain: Domain,
        name: str = "metric",
        h=None,
        exact_curvature: Callable | None = None,
        spd_grid: int = 9,
        params: dict | None = None,
    ):
        self.domain = domain
        self.name = name
        self.params = dict(params or {})
        n = domain.dim
        if n < 2:
            raise ValueError("charts need dimension >= 2")
        self.h = np.asarray(1e-3 * domain.extent if h is None else np.broadcast_to(h, (n,)), dtype=float)
        self._fields: dict[tuple[int, int], ScalarField] = {}
        self.sources: dict[tuple[int, int], str] = {}
        for (i, j), comp in components.items():
            i, j = min(i, j), max(i, j)
            if isinstance(comp, (str, Expr)):
                expr = parse_expr(comp) if isinstance(comp, str) else comp
                self._fields[(i, j)] = ScalarField.from_expr(expr, domain, h=self.h)
                self.sources[(i, j)] = comp if isinstance(comp, str) else str(comp)
            elif callable(comp):
                self._fields[(i, j)] = ScalarField(comp, domain, h=self.h)
                self.sources[(i, j)] = getattr(comp, "__name__", "callable")
            else:
                raise ExprError(f"metric component g{i+1}{j+1} must be text or callable")
        for i in range(n):
            if (i, i) not in self._fields:
                raise ExprError(f"metric component g{i+1}{i+1} is missing")
        self.exact_curvature = exact_curvature
        self._check_positive(spd_grid)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def length_scale(self) -> float:
        return float(np.max(self.domain.extent))

    def __repr__(self) -> str:
        return f"MetricChart({self.name!r}, dim={self.dim})"

    # --- evaluation -------------------------------------------------------------

    def _raw_metric(self, X: np.ndarray) -> np.ndarray:
        n = self.dim
        G = np.zeros(X.shape[:-1] + (n, n))
        self.domain.check(X)
        X = self.domain.wrap(X)
        for (i, j), f in self._fields.items():
            val = f.evaluate_wrapped(X)
            G[..., i, j] = val
            G[..., j, i] = val
        return G

    def metric(self, X) -> np.ndarray:
        """Metric matrix ``g_ij`` at points ``X`` of shape ``(..., n)``."""
        return self._raw_metric(np.asarray(X, dtype=float))

    def metric_jet(self, X, order: int = 1, h=None):
        """Metric and its coordinate partials up to ``order`` (1 or 2).

        Returns ``(g, dg)`` or ``(g, dg, ddg)`` with ``dg[..., c, i, j] =
        d_c g_ij`` and ``ddg[..., c, d, i, j] = d_c d_d g_ij``.
        """
        X = np.asarray(X, dtype=float)
        n = self.dim
        st = _jet_stencil(n, order)
        vals = st.apply(self._raw_metric, X, self.h if h is None else h)
        b = X.ndim - 1
        g = np.take(vals, 0, axis=b)
        dg = np.moveaxis(np.take(vals, range(1, n + 1), axis=b), b, -3)
        if order < 2:
            return g, dg
        ddg = np.zeros(X.shape[:-1] + (n, n, n, n))
        k = n + 1
        for a in range(n):
            for c in range(a, n):
                ddg[..., a, c, :, :] = np.take(vals, k, axis=b)
                ddg[..., c, a, :, :] = ddg[..., a, c, :, :]
                k += 1
        return g, dg, ddg

    def christoffel(self, X) -> np.ndarray:
        """``Gamma[..., a, b, c]`` = Γ^a_bc of the Levi-Civita connection."""
        g, dg = self.metric_jet(X, 1)
        return _christoffel(g, dg)[0]

    def christoffel_jet(self, X):
        """Christoffel symbols and their partials ``dGamma[..., d, a, b, c] = d_d Γ^a_bc``."""
        g, dg, ddg = self.metric_jet(X, 2)
        gam, ginv, low = _christoffel(g, dg)
        # d_d Γ_ebc (all lowered), then raise with the derivative of g^{-1}
        dlow = 0.5 * (
            np.einsum("...dbec->...debc", ddg)
            + np.einsum("...dceb->...debc", ddg)
            - np.einsum("...debc->...debc", ddg)
        )
        dginv = -np.einsum("...ap,...dpq,...qe->...dae", ginv, dg, ginv)
        dgam = np.einsum("...dae,...ebc->...dabc", dginv, low) + np.einsum("...ae,...debc->...dabc", ginv, dlow)
        return gam, dgam

    def riemann(self, X) -> np.ndarray:
        """``R[..., a, b, c, d] = R^a_bcd`` with ``R(∂c, ∂d)∂b = R^a_bcd ∂a``.

        Convention ``R(X, Y) = ∇X∇Y - ∇Y∇X - ∇[X,Y]``, so the unit sphere has
        ``<R(e1, e2)e2, e1> = +1``.
        """
        gam, dgam = self.christoffel_jet(X)
        return _riemann(gam, dgam)

    # --- validation --------------------------------------------------------------

    def sample_grid(self, per_axis: int, margin: float = 0.0) -> np.ndarray:
        axes = []
        for (lo, hi), per, p in zip(self.domain.bounds, self.domain.periodic, self.domain.period):
            if per:
                axes.append(lo + p * np.arange(per_axis) / per_axis)
            else:
                m = margin * (hi - lo)
                axes.append(np.linspace(lo + m, hi - m, per_axis))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    def _check_positive(self, per_axis: int) -> None:
        if per_axis <= 0:
            return
        X = self.sample_grid(per_axis)
        eig = np.linalg.eigvalsh(self.metric(X))
        k = int(np.argmin(eig[:, 0]))
        if not eig[k, 0] > 0:
            raise DegenerateMetric(
                f"metric {self.name!r} is not positive definite at {X[k].tolist()} (min eigenvalue {eig[k, 0]:.3e})"
            )


def _christoffel(g: np.ndarray, dg: np.ndarray):
    ginv = np.linalg.inv(g)
    # Γ_ebc = ½ (d_b g_ec + d_c g_eb - d_e g_bc)
    low = 0.5 * (
        np.einsum("...bec->...ebc", dg) + np.einsum("...ceb->...ebc", dg) - np.einsum("...ebc->...ebc", dg)
    )
    return np.einsum("...ae,...ebc->...abc", ginv, low), ginv, low


def _riemann(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    # R^a_bcd = d_c Γ^a_db - d_d Γ^a_cb + Γ^a_ce Γ^e_db - Γ^a_de Γ^e_cb
    t1 = np.einsum("...cadb->...abcd", dgam)
    quad = np.einsum("...ace,...edb->...abcd", gam, gam)
    return t1 - np.swapaxes(t1, -1, -2) + quad - np.swapaxes(quad, -1, -2)


# --- builtin surfaces -----------------------------------------------------------


def plane(extent: float = 10.0) -> MetricChart:
    dom = Domain.make([(-extent, extent), (-extent, extent)])
    return MetricChart({(0, 0): "1", (1, 1): "1"}, dom, "plane", exact_curvature=lambda X: np.zeros(np.shape(X)[:-1]))


def polar_plane(r_min: float = 0.05, r_max: float = 10.0) -> MetricChart:
    dom = Domain.make([(r_min, r_max), (0.0, 2 * math.pi)], periodic=[False, True])
    return MetricChart(
        {(0, 0): "1", (1, 1): "u^2"}, dom, "polar_plane", exact_curvature=lambda X: np.zeros(np.shape(X)[:-1])
    )


def sphere(radius: float = 1.0, margin: float = 0.05) -> MetricChart:
    """Round sphere in polar coordinates (u = polar angle, v = longitude)."""
    rho = float(radius)
    dom = Domain.make([(margin, math.pi - margin), (0.0, 2 * math.pi)], periodic=[False, True])
    r2 = repr(rho * rho)
    return MetricChart(
        {(0, 0): r2, (1, 1): f"{r2}*sin(u)^2"},
        dom,
        "sphere",
        exact_curvature=lambda X: np.full(np.shape(X)[:-1], 1.0 / rho**2),
        params={"radius": rho},
    )


def half_plane(extent: float = 3.0, v_min: float = 0.2, v_max: float = 5.0) -> MetricChart:
    dom = Domain.make([(-extent, extent), (v_min, v_max)])
    return MetricChart(
        {(0, 0): "1/v^2", (1, 1): "1/v^2"},
        dom,
        "half_plane",
        exact_curvature=lambda X: np.full(np.shape(X)[:-1], -1.0),
    )


def torus(R: float = 2.0, r: float = 1.0) -> MetricChart:
    """Torus of revolution; u is the angle around the tube, v around the axis."""
    if not R > r > 0:
        raise ValueError("torus needs R > r > 0")
    dom = Domain.make([(0.0, 2 * math.pi), (0.0, 2 * math.pi)], periodic=[True, True])

    def exact(X):
        u = np.asarray(X)[..., 0]
        return np.cos(u) / (r * (R + r * np.cos(u)))

    return MetricChart(
        {(0, 0): repr(r * r), (1, 1): f"({R!r} + {r!r}*cos(u))^2"},
        dom,
        "torus",
        exact_curvature=exact,
        params={"R": R, "r": r},
    )


def flat_torus(dim: int = 2, side: float = 1.0) -> MetricChart:
    dom = Domain.make([(0.0, side)] * dim, periodic=[True] * dim)
    comps = {(i, i): "1" for i in range(dim)}
    return MetricChart(comps, dom, f"flat_torus{dim}", exact_curvature=lambda X: np.zeros(np.shape(X)[:-1]))


def perturbed_flat(half_width: float = 0.5, h: float = 2e-3) -> MetricChart:
    """Conformally flat metric (1 + u v + u^3) δ with no expected symmetry.

    The third covariant derivatives of K are large (order 30) on this small
    box, so the default step is doubled to keep roundoff in the curvature
    jet below the identity tolerance.
    """
    dom = Domain.make([(-half_width, half_width), (-half_width, half_width)])

    def exact(X):
        X = np.asarray(X)
        u, v = X[..., 0], X[..., 1]
        lam = 1 + u * v + u**3
        lu, lv, luu = v + 3 * u**2, u, 6 * u
        lap_log = luu / lam - (lu**2 + lv**2) / lam**2
        return -lap_log / (2 * lam)

    expr = "1 + u*v + u^3"
    return MetricChart({(0, 0): expr, (1, 1): expr}, dom, "perturbed_flat", h=h, exact_curvature=exact)


def surface_of_revolution(profile_radius: str, profile_speed: str = "1", u_range=(0.1, 3.0)) -> MetricChart:
    """Metric ``speed(u)^2 du^2 + radius(u)^2 dv^2`` (v periodic)."""
    dom = Domain.make([u_range, (0.0, 2 * math.pi)], periodic=[False, True])
    return MetricChart(
        {(0, 0): f"({profile_speed})^2", (1, 1): f"({profile_radius})^2"}, dom, "revolution"
    )


BUILTINS: dict[str, Callable[..., MetricChart]] = {
    "plane": plane,
    "polar_plane": polar_plane,
    "sphere": sphere,
    "half_plane": half_plane,
    "torus": torus,
    "flat_torus": flat_torus,
    "perturbed_flat": perturbed_flat,
}


def builtin(name: str, **params) -> MetricChart:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ExprError(f"unknown builtin surface {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(**params)


def metric_chart(
    g11: str,
    g12: str,
    g22: str,
    domain,
    periodic=None,
    period=None,
    name: str = "metric",
    h=None,
) -> MetricChart:
    """Two-dimensional chart from expression text for ``g11, g12, g22``."""
    dom = Domain.make(domain, periodic, period)
    comps = {(0, 0): g11, (1, 1): g22}
    if g12 is not None and str(g12).strip() not in ("", "0", "0.0"):
        comps[(0, 1)] = g12
    return MetricChart(comps, dom, name, h=h)
