"""Orthonormal frames, connection forms, curvature and the curvature jet.

Conventions
-----------
* Frames are stored as matrices ``E[..., a, i]``: column ``i`` holds the
  coordinate components of ``e_i``.
* Connection forms ``omega_j^i`` are defined by ``∇ e_j = omega_j^i e_i``;
  ``W[..., a, i, j] = omega_j^i(∂_a)``.  In two dimensions the single
  coefficient is ``omega21 = omega_2^1 = <∇ e2, e1>``.
* ``R(X, Y) = ∇X∇Y - ∇Y∇X - ∇[X,Y]`` and frame components
  ``R_ijkl = <e_i, R(e_k, e_l) e_j>``, so ``K = R_1212`` and the unit sphere
  has ``K = +1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Sequence

import numpy as np

from ..errors import DegenerateMetric, ExprError, ToleranceExceeded
from ..exprcore import ScalarField, StencilSet, gradient, parse_expr
from ..tolerances import DEFAULT
from .chart import MetricChart, _jet_stencil

_VALUE_GRAD = {}


def _value_and_gradient(fn: Callable, X: np.ndarray, steps) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``fn`` at ``X`` and its coordinate gradient in one batched call."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    st = _VALUE_GRAD.get(n)
    if st is None:
        st = _VALUE_GRAD[n] = StencilSet([(0,) * n] + [tuple(int(a == b) for b in range(n)) for a in range(n)])
    out = st.apply(fn, X, steps)
    b = X.ndim - 1
    return np.take(out, 0, axis=b), np.moveaxis(np.take(out, range(1, n + 1), axis=b), b, b)


# --- frames -------------------------------------------------------------------


def gram_schmidt_frame(g: np.ndarray) -> np.ndarray:
    """Oriented orthonormal frame from Gram-Schmidt of the coordinate basis.

    With ``g = L L^T`` (Cholesky) the frame is ``L^{-T}``: upper triangular,
    so ``e_1`` is parallel to ``∂_1``, and ``det > 0``.
    """
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetric("metric is not positive definite at a requested point") from exc
    n = g.shape[-1]
    eye = np.broadcast_to(np.eye(n), g.shape)
    return np.swapaxes(np.linalg.solve(L, eye), -1, -2)


class FrameField:
    """Oriented orthonormal frame field on a chart.

    Parameters
    ----------
    chart : MetricChart
    rotation : float or callable, optional
        Two-dimensional charts only: rotate the Gram-Schmidt frame by this
        angle (a constant or a vectorised function of the point).  Used to
        test frame independence.
    """

    def __init__(self, chart: MetricChart, rotation=None):
        if rotation is not None and chart.dim != 2:
            raise ValueError("frame rotation is only defined for surfaces")
        self.chart = chart
        self.rotation = rotation

    def _angle(self, X: np.ndarray) -> np.ndarray:
        if callable(self.rotation):
            return np.asarray(self.rotation(X), dtype=float)
        return np.full(X.shape[:-1], float(self.rotation))

    def frame_from_metric(self, X: np.ndarray, g: np.ndarray) -> np.ndarray:
        E = gram_schmidt_frame(g)
        if self.rotation is None:
            return E
        phi = self._angle(X)
        c, s = np.cos(phi), np.sin(phi)
        rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        return E @ rot

    def E(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.frame_from_metric(X, self.chart.metric(X))

    def connection_forms(self, X) -> np.ndarray:
        """``W[..., a, i, j] = omega_j^i(∂_a) = <e_i, ∇_{∂a} e_j>``."""
        X = np.asarray(X, dtype=float)
        E, dE = _value_and_gradient(self.E, X, self.chart.h)
        g, dg = self.chart.metric_jet(X, 1)
        from .chart import _christoffel

        gam = _christoffel(g, dg)[0]
        # (∇_a e_j)^c = ∂_a E^c_j + Γ^c_ab E^b_j
        nab = dE + np.einsum("...cab,...bj->...acj", gam, E)
        return np.einsum("...di,...dc,...acj->...aij", E, g, nab)

    def omega21(self, X) -> np.ndarray:
        """Coordinate components ``c_a = omega_2^1(∂_a)`` (surfaces only)."""
        return self.connection_forms(X)[..., 0, 1]


@dataclass(frozen=True)
class Frame2D:
    """Oriented orthonormal frame at one point of a surface chart."""

    point: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    omega: np.ndarray  # omega_2^1 on the coordinate basis

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack([self.e1, self.e2])

    def connection(self, w) -> float:
        """Value of ``omega_2^1`` on the coordinate vector ``w``."""
        return float(np.dot(self.omega, np.asarray(w, dtype=float)))

    def components(self, w) -> np.ndarray:
        """Frame components ``(omega^1(w), omega^2(w))`` of a coordinate vector."""
        return np.linalg.solve(self.matrix, np.asarray(w, dtype=float))


def _surface_only(chart: MetricChart) -> None:
    if chart.dim != 2:
        raise ValueError(f"operation needs a surface chart, got dimension {chart.dim}")


def orthonormal_frame(chart: MetricChart, p, frame: FrameField | None = None) -> Frame2D:
    """Gram-Schmidt frame of ``(∂u, ∂v)`` at ``p`` with its connection coefficient."""
    _surface_only(chart)
    frame = frame or FrameField(chart)
    p = np.asarray(p, dtype=float)
    chart.domain.check(p)
    g = chart.metric(p)
    if np.linalg.eigvalsh(g)[0] <= 0:
        raise DegenerateMetric(f"metric is not positive definite at {p.tolist()}")
    E = frame.frame_from_metric(p, g)
    return Frame2D(p, E[:, 0].copy(), E[:, 1].copy(), frame.omega21(p))


def connection_coefficient(chart: MetricChart, p, w, frame: FrameField | None = None) -> float:
    """``omega_2^1(w)`` at ``p`` in the (default Gram-Schmidt) oriented frame."""
    _surface_only(chart)
    frame = frame or FrameField(chart)
    return float(np.dot(frame.omega21(np.asarray(p, dtype=float)), np.asarray(w, dtype=float)))


# --- curvature ------------------------------------------------------------------


def frame_riemann(chart: MetricChart, X, frame: FrameField | None = None) -> np.ndarray:
    """Frame components ``R_ijkl = <e_i, R(e_k, e_l) e_j>``."""
    frame = frame or FrameField(chart)
    X = np.asarray(X, dtype=float)
    R = chart.riemann(X)
    g = chart.metric(X)
    E = frame.frame_from_metric(X, g)
    low = np.einsum("...pa,...abcd->...pbcd", g, R)
    return np.einsum("...pbcd,...pi,...bj,...ck,...dl->...ijkl", low, E, E, E, E)


def gauss_curvature(chart: MetricChart, X):
    """Gaussian curvature ``K = <R(∂u, ∂v)∂v, ∂u> / det g`` at one or many points."""
    _surface_only(chart)
    X = np.asarray(X, dtype=float)
    g, dg, ddg = chart.metric_jet(X, 2)
    K = _gauss_from_jet(g, dg, ddg)
    return float(K) if K.ndim == 0 else K


def _gauss_from_jet(g, dg, ddg) -> np.ndarray:
    from .chart import _christoffel

    gam, ginv, low = _christoffel(g, dg)
    # only R^a_101 is needed: R^a_bcd with b=1, c=0, d=1
    dlow = 0.5 * (
        np.einsum("...dbec->...debc", ddg) + np.einsum("...dceb->...debc", ddg) - ddg
    )
    dginv = -np.einsum("...ap,...dpq,...qe->...dae", ginv, dg, ginv)
    # ∂_d Γ^a_bc for the needed (d, b, c) combinations
    def dgam(d, b, c):
        return np.einsum("...ae,...e->...a", dginv[..., d, :, :], low[..., :, b, c]) + np.einsum(
            "...ae,...e->...a", ginv, dlow[..., d, :, b, c]
        )

    r = (
        dgam(0, 1, 1)
        - dgam(1, 0, 1)
        + np.einsum("...ae,...e->...a", gam[..., :, 0, :], gam[..., :, 1, 1])
        - np.einsum("...ae,...e->...a", gam[..., :, 1, :], gam[..., :, 0, 1])
    )
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    return np.einsum("...a,...a->...", g[..., 0, :], r) / det


# --- curvature jet ----------------------------------------------------------------


JET_FIELDS = ("K", "K1", "K2", "K11", "K12", "K22", "K111", "K112", "K121", "K122", "K221", "K222")


@dataclass(frozen=True)
class CurvatureJet:
    """Covariant frame derivatives of K up to third order at one point.

    ``K12`` is the symmetrised second derivative; ``K21`` and the identity
    residuals are kept as diagnostics.
    """

    point: tuple[float, ...]
    K: float
    K1: float
    K2: float
    K11: float
    K12: float
    K22: float
    K111: float
    K112: float
    K121: float
    K122: float
    K221: float
    K222: float
    K21: float = float("nan")
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in JET_FIELDS}

    @property
    def gradient(self) -> np.ndarray:
        return np.array([self.K1, self.K2])


# Step multipliers of the chart step h: K itself from second derivatives of g
# at 8h, then K_i, K_ij, K_ijk at 2h, 4h, 8h.  Computing K at the larger step
# lowers its roundoff, which the three nested levels would otherwise amplify.
LADDER_STEPS = (8.0, 2.0, 4.0, 8.0)


def _lattice_unit(steps) -> tuple[float, list[int]]:
    """Common unit ``u`` with every ladder step an integer multiple of it."""
    fr = [Fraction(float(x)).limit_denominator(64) for x in steps]
    den = 1
    for f in fr:
        den = den * f.denominator // gcd(den, f.denominator)
    return 1.0 / den, [int(f * den) for f in fr]


@lru_cache(maxsize=None)
def _ladder_plan(n: int, steps: tuple) -> dict:
    """Index maps of the nested stencils on the integer lattice.

    Level ``k`` needs its input at the offsets ``o + m_k s`` for every output
    offset ``o`` and stencil offset ``s``; shared points are stored once.
    """
    unit, mult = _lattice_unit(steps)
    vg = StencilSet([(0,) * n] + [tuple(int(a == b) for b in range(n)) for a in range(n)])
    js = _jet_stencil(n, 2)
    stencils = [(mult[3], vg), (mult[2], vg), (mult[1], vg), (mult[0], js)]
    levels = [np.zeros((1, n), dtype=np.int64)]
    maps = []
    for m, st in stencils:
        out = levels[-1]
        need = out[:, None, :] + (m * st.offsets).astype(np.int64)[None]
        uniq, inv = np.unique(need.reshape(-1, n), axis=0, return_inverse=True)
        levels.append(uniq)
        maps.append(inv.reshape(len(out), len(st.offsets)))
    return {"unit": unit, "mult": mult, "levels": levels, "maps": maps, "vg": vg, "js": js}


class _Ladder:
    """Nested evaluation of K, K_i, K_ij, K_ijk on arrays of points.

    All stencil offsets are integer multiples of a common unit of the chart
    step, so each level is evaluated once per distinct lattice point.
    """

    def __init__(self, chart: MetricChart, frame: FrameField, steps=LADDER_STEPS):
        self.chart = chart
        self.frame = frame
        self.plan = _ladder_plan(chart.dim, tuple(float(s) for s in steps))
        self.h = np.broadcast_to(np.asarray(chart.h, dtype=float), (chart.dim,))

    def _points(self, X, level):
        return X[:, None, :] + self.plan["levels"][level] * (self.plan["unit"] * self.h)

    def _combine(self, vals, st, level_map, mult):
        """Apply stencil ``st`` with step ``mult`` units to values on the level below."""
        gathered = vals[:, level_map]  # (B, out, S, ...)
        steps = mult * self.plan["unit"] * self.h
        B, O = gathered.shape[:2]
        flat = gathered.reshape((B * O,) + gathered.shape[2:])
        return st.combine(flat, 1, steps).reshape((B, O, -1) + gathered.shape[3:])

    def _frame_and_omega(self, P):
        E = self.frame.E(P)
        c = self.frame.omega21(P)
        return E, np.einsum("...a,...ak->...k", c, E)  # omega21(e_k)

    def level3(self, X):
        """Everything: returns a dict of arrays."""
        plan = self.plan
        X = np.asarray(X, dtype=float).reshape(-1, self.chart.dim)
        m3, m2, m1, m0 = plan["mult"][3], plan["mult"][2], plan["mult"][1], plan["mult"][0]
        # K on level 3 from the raw metric on level 4
        g4 = self.chart._raw_metric(self._points(X, 4))
        jets = self._combine(g4, plan["js"], plan["maps"][3], m0)
        n = self.chart.dim
        g, dg = jets[:, :, 0], jets[:, :, 1 : n + 1]
        ddg = np.zeros(g.shape[:2] + (n, n, n, n))
        k = n + 1
        for a in range(n):
            for c in range(a, n):
                ddg[:, :, a, c] = ddg[:, :, c, a] = jets[:, :, k]
                k += 1
        K3 = _gauss_from_jet(g, dg, ddg)
        # level 1 on level 2: (K, K1, K2)
        vg = self._combine(K3, plan["vg"], plan["maps"][2], m1)
        E2 = self.frame.E(self._points(X, 2))
        L1 = np.concatenate([vg[:, :, 0, None], np.einsum("...a,...ai->...i", vg[:, :, 1:], E2)], axis=-1)
        # level 2 on level 1: (K, K1, K2, K11, K12, K21, K22, K11, K12sym, K22)
        d = self._combine(L1, plan["vg"], plan["maps"][1], m2)
        E1, om1 = self._frame_and_omega(self._points(X, 1))
        L1v, ej = d[:, :, 0], np.einsum("...aq,...aj->...qj", d[:, :, 1:], E1)
        K1, K2 = L1v[..., 1], L1v[..., 2]
        K1j = ej[..., 1, :] + K2[..., None] * om1
        K2j = ej[..., 2, :] - K1[..., None] * om1
        sym = 0.5 * (K1j[..., 1] + K2j[..., 0])
        L2s = np.concatenate(
            [L1v, K1j, K2j, np.stack([K1j[..., 0], sym, K2j[..., 1]], -1)], axis=-1
        )
        # level 3 at the points themselves
        d = self._combine(L2s, plan["vg"], plan["maps"][0], m3)[:, 0]
        E0, om = self._frame_and_omega(X)
        L2s, ek = d[:, 0], np.einsum("...aq,...ak->...qk", d[:, 1:, 7:10], E0)
        K11, K12, K22 = L2s[..., 7], L2s[..., 8], L2s[..., 9]
        K11k = ek[..., 0, :] + 2 * K12[..., None] * om
        K12k = ek[..., 1, :] - (K11 - K22)[..., None] * om
        K22k = ek[..., 2, :] - 2 * K12[..., None] * om
        out = {
            "K": L2s[..., 0],
            "K1": L2s[..., 1],
            "K2": L2s[..., 2],
            "K11": K11,
            "K12": K12,
            "K22": K22,
            "K111": K11k[..., 0],
            "K112": K11k[..., 1],
            "K121": K12k[..., 0],
            "K122": K12k[..., 1],
            "K221": K22k[..., 0],
            "K222": K22k[..., 1],
            "K21": L2s[..., 5],
            "K12_raw": L2s[..., 4],
        }
        out.update(jet_residuals(out))
        return out


def jet_residuals(j: dict) -> dict:
    """Relative residuals of the three jet identities.

    Each residual is ``|lhs - rhs| / (1 + max |term|)``.
    """

    def rel(lhs, rhs, *terms):
        scale = 1.0 + np.max(np.abs(np.stack([lhs, rhs, *terms])), axis=0)
        return np.abs(lhs - rhs) / scale

    K12 = j.get("K12_raw", j["K12"])
    return {
        "res_K12": rel(K12, j["K21"]),
        "res_K112": rel(j["K112"], j["K121"] - j["K2"] * j["K"], j["K121"], j["K2"] * j["K"]),
        "res_K122": rel(j["K122"], j["K221"] + j["K1"] * j["K"], j["K221"], j["K1"] * j["K"]),
    }


def curvature_jet_array(
    chart: MetricChart, X, frame: FrameField | None = None, chunk: int = 64, steps=LADDER_STEPS
) -> dict:
    """Vectorised curvature jet on an array of points ``(..., 2)``.

    Returns a dict of arrays keyed by ``JET_FIELDS`` plus ``K21`` and the
    identity residuals ``res_K12``, ``res_K112``, ``res_K122``.
    """
    _surface_only(chart)
    X = np.asarray(X, dtype=float)
    shape = X.shape[:-1]
    flat = X.reshape(-1, 2)
    ladder = _Ladder(chart, frame or FrameField(chart), steps)
    parts = [ladder.level3(flat[i : i + chunk]) for i in range(0, len(flat), chunk)]
    if not parts:
        return {}
    return {k: np.concatenate([p[k] for p in parts]).reshape(shape) for k in parts[0]}


def curvature_jet(chart: MetricChart, p, frame: FrameField | None = None, tol: float = DEFAULT.jet_symmetry) -> CurvatureJet:
    """K and its covariant frame derivatives up to order three at ``p``.

    Raises
    ------
    ToleranceExceeded
        If any of the identities ``K12 = K21``, ``K112 = K121 - K2 K`` or
        ``K122 = K221 + K1 K`` fails by more than ``tol`` (relative).
    DomainExceeded
        If the nested stencils leave the chart.
    """
    p = np.asarray(p, dtype=float)
    j = curvature_jet_array(chart, p[None, :], frame)
    vals = {k: float(v[0]) for k, v in j.items()}
    res = {k: vals[k] for k in ("res_K12", "res_K112", "res_K122")}
    worst = max(res, key=res.get)
    if res[worst] > tol:
        raise ToleranceExceeded(
            f"curvature-jet identity {worst[4:]} fails at {p.tolist()} (residual {res[worst]:.2e}); "
            "the differentiation step is too coarse",
            residual=res[worst],
            tolerance=tol,
        )
    return CurvatureJet(
        tuple(p.tolist()), **{k: vals[k] for k in JET_FIELDS}, K21=vals["K21"], residuals=res
    )


# --- Killing residual ----------------------------------------------------------


class VectorFieldJet:
    """A candidate Killing field and its derived first jet.

    Parameters
    ----------
    chart : MetricChart
    components : sequence
        One entry per index: expression text or vectorised callable.
    basis : {"coordinate", "frame"}
        Whether ``components`` are coordinate components or frame components
        ``xi^i`` with respect to ``frame``.
    frame : FrameField, optional
    """

    def __init__(self, chart: MetricChart, components: Sequence, basis: str = "coordinate", frame: FrameField | None = None):
        if len(components) != chart.dim:
            raise ExprError(f"need {chart.dim} components, got {len(components)}")
        if basis not in ("coordinate", "frame"):
            raise ValueError("basis must be 'coordinate' or 'frame'")
        self.chart = chart
        self.basis = basis
        self.frame = frame or FrameField(chart)
        self._comps = [
            ScalarField.from_expr(parse_expr(c), chart.domain, h=chart.h) if isinstance(c, str) else c
            for c in components
        ]

    def coordinate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        vals = np.stack([np.broadcast_to(c(X), X.shape[:-1]) for c in self._comps], -1)
        if self.basis == "coordinate":
            return vals
        return np.einsum("...ai,...i->...a", self.frame.E(X), vals)

    def frame_components(self, X) -> np.ndarray:
        """``xi^i`` with respect to the frame field."""
        X = np.asarray(X, dtype=float)
        vals = np.stack([np.broadcast_to(c(X), X.shape[:-1]) for c in self._comps], -1)
        if self.basis == "frame":
            return vals
        return np.linalg.solve(self.frame.E(X), vals[..., None])[..., 0]

    def derived(self, X) -> np.ndarray:
        """``xi^i_k = e_k(xi^i) + xi^j omega_j^i(e_k)`` as ``D[..., i, k]``."""
        X = np.asarray(X, dtype=float)
        xi, dxi = _value_and_gradient(self.frame_components, X, self.chart.h)
        E = self.frame.E(X)
        Om = np.einsum("...aij,...ak->...ijk", self.frame.connection_forms(X), E)
        return np.einsum("...ai,...ak->...ik", dxi, E) + np.einsum("...j,...ijk->...ik", xi, Om)

    def skew_part(self, X) -> np.ndarray:
        D = self.derived(X)
        return 0.5 * (D - np.swapaxes(D, -1, -2))

    def jet2d(self, X) -> np.ndarray:
        """``(xi^1, xi^2, xi^1_2)`` on a surface, with ``xi^1_2`` the skew part."""
        return np.concatenate([self.frame_components(X), self.skew_part(X)[..., 0:1, 1]], axis=-1)


@dataclass(frozen=True)
class KillingResidual:
    first_order: float
    second_order: float

    def __iter__(self):
        return iter((self.first_order, self.second_order))


def killing_residual(chart: MetricChart, field: VectorFieldJet, p) -> KillingResidual:
    """Residuals of the prolonged Killing system at ``p``.

    The first-order residual is ``max_jk |xi^j_k + xi^k_j| / 2``.  The second
    is ``max |theta^i_j(e_l)|`` where, with ``A`` the skew part of
    ``xi^i_k``::

        theta^i_j(e_l) = e_l(A^i_j) - A^i_k omega_j^k(e_l)
                         + A^k_j omega_k^i(e_l) + xi^k R_ijkl
    """
    p = np.asarray(p, dtype=float)
    frame = field.frame
    D = field.derived(p)
    first = float(np.max(np.abs(D + D.T)) / 2)
    dA = gradient(field.skew_part, p, 2 * chart.h)  # (a, i, j)
    E = frame.E(p)
    Om = np.einsum("aij,ak->ijk", frame.connection_forms(p), E)
    A = 0.5 * (D - D.T)
    xi = field.frame_components(p)
    R = frame_riemann(chart, p, frame)
    theta = (
        np.einsum("aij,al->ijl", dA, E)
        - np.einsum("ik,kjl->ijl", A, Om)
        + np.einsum("kj,ikl->ijl", A, Om)
        + np.einsum("k,ijkl->ijl", xi, R)
    )
    return KillingResidual(first, float(np.max(np.abs(theta))))
