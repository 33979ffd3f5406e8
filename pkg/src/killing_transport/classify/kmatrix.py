"""Torsion functions and the curvature matrix of the local isometry algebra."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..manifold import CurvatureJet, FrameField, MetricChart, curvature_jet, curvature_jet_array
from ..manifold.geometry import LADDER_STEPS
from ..tolerances import DEFAULT, Tolerances
from ..transport import Jet2D

ROW_LABELS = ("T", "T1", "T2", "dT1(e1)", "dT1(e2)", "dT2(e2)")
# weights that make a frame rotation act orthogonally on the rows
_ROW_WEIGHTS = np.array([1.0, 1.0, 1.0, 1.0, np.sqrt(2.0), 1.0])


def _jet_values(xi) -> np.ndarray:
    return xi.as_array() if isinstance(xi, Jet2D) else np.asarray(xi, dtype=float)


def torsion_t(jet: CurvatureJet, xi) -> float:
    """``T = K1 xi1 + K2 xi2``."""
    x = _jet_values(xi)
    return float(jet.K1 * x[0] + jet.K2 * x[1])


def torsion_t12(jet: CurvatureJet, xi) -> tuple[float, float]:
    """``(T1, T2)`` with ``T1 = K11 xi1 + K12 xi2 - K2 xi12`` and ``T2 = K12 xi1 + K22 xi2 + K1 xi12``."""
    x = _jet_values(xi)
    t1 = jet.K11 * x[0] + jet.K12 * x[1] - jet.K2 * x[2]
    t2 = jet.K12 * x[0] + jet.K22 * x[1] + jet.K1 * x[2]
    return float(t1), float(t2)


def matrix_from_jet(j) -> np.ndarray:
    """The 6x3 matrix from a CurvatureJet or a dict of (arrays of) jet values."""
    g = (lambda k: getattr(j, k)) if isinstance(j, CurvatureJet) else (lambda k: np.asarray(j[k], dtype=float))
    zero = np.zeros_like(np.asarray(g("K1"), dtype=float))
    rows = [
        (g("K1"), g("K2"), zero),
        (g("K11"), g("K12"), -g("K2")),
        (g("K12"), g("K22"), g("K1")),
        (g("K111"), g("K112"), -2 * g("K12")),
        (g("K121"), g("K122"), g("K11") - g("K22")),
        (g("K221"), g("K222"), 2 * g("K12")),
    ]
    return np.stack([np.stack([np.asarray(c, dtype=float) for c in r], -1) for r in rows], -2)


@dataclass
class KMatrix:
    """The 6x3 curvature matrix at one point with its singular values.

    ``weighted_singular_values`` come from the matrix with the mixed row
    ``dT1(e2)`` scaled by ``sqrt 2``; those are invariant under rotations
    of the frame, the plain ones are not.
    """

    point: tuple
    matrix: np.ndarray
    singular_values: np.ndarray
    weighted_singular_values: np.ndarray
    rank: int
    threshold: float
    ladder_error: float = 0.0
    jet: CurvatureJet | None = None

    def kernel_residual(self, xi) -> float:
        """``|K xi| / |xi|``."""
        x = _jet_values(xi)
        return float(np.linalg.norm(self.matrix @ x) / np.linalg.norm(x))


def rank_threshold(sigma_max, tol: Tolerances = DEFAULT, ladder_error=0.0):
    """``max(rank_rel * sigma_max, rank_abs, rank_ladder * ladder_error)``.

    The absolute parts absorb derivative-ladder error: ``rank_abs`` is a
    fixed floor and ``ladder_error`` a per-point estimate from
    :func:`jet_with_error`.
    """
    return np.maximum(np.maximum(tol.rank_rel * np.asarray(sigma_max), tol.rank_abs), tol.rank_ladder * np.asarray(ladder_error))


# second ladder used to estimate the differentiation error of the matrix
_CHECK_SCALE = 0.75


def jet_with_error(chart: MetricChart, X, frame: FrameField | None = None) -> tuple[dict, np.ndarray]:
    """Curvature jets at ``X`` and the spectral norm of the matrix change
    when every ladder step is scaled by 0.75.

    The jet identities cannot see a smooth truncation error in ``K``; the
    step comparison does.
    """
    j = curvature_jet_array(chart, X, frame)
    j2 = curvature_jet_array(chart, X, frame, steps=tuple(_CHECK_SCALE * s for s in LADDER_STEPS))
    diff = matrix_from_jet(j) - matrix_from_jet(j2)
    return j, np.linalg.norm(diff, 2, axis=(-2, -1))


def k_matrix(
    chart: MetricChart,
    p,
    frame: FrameField | None = None,
    tol: Tolerances = DEFAULT,
) -> KMatrix:
    """Assemble the curvature matrix at ``p`` from the curvature jet.

    Raises
    ------
    ToleranceExceeded
        If the curvature-jet identities fail (from ``curvature_jet``).
    """
    jet = curvature_jet(chart, p, frame, tol.jet_symmetry)
    _, err = jet_with_error(chart, np.asarray(p, dtype=float)[None, :], frame)
    M = matrix_from_jet(jet)
    s = np.linalg.svd(M, compute_uv=False)
    sw = np.linalg.svd(M * _ROW_WEIGHTS[:, None], compute_uv=False)
    thr = float(rank_threshold(s[0], tol, err[0]))
    return KMatrix(jet.point, M, s, sw, int(np.count_nonzero(s > thr)), thr, float(err[0]), jet)


class Symmetry(str, enum.Enum):
    THREE_PARAM = "ThreeParam"
    ONE_PARAM = "OneParam"
    TRIVIAL = "Trivial"
    INDETERMINATE = "Indeterminate"


@dataclass
class Classification:
    """Dimension class of the local isometry algebra at a point.

    ``gap_ratio`` is ``sigma_r / sigma_{r+1}`` (1-based), infinite when the
    next singular value is exactly zero and ``None`` for ranks 0 and 3.
    """

    kind: Symmetry
    rank: int
    gap_ratio: float | None
    singular_values: tuple
    gradient_norm: float
    point: tuple = ()
    reason: str = ""
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "point": list(self.point),
            "kind": self.kind.value,
            "rank": self.rank,
            "gap_ratio": self.gap_ratio,
            "singular_values": list(self.singular_values),
            "gradient_norm": self.gradient_norm,
            "reason": self.reason,
        }


def gradient_threshold(K, length_scale: float, tol: Tolerances = DEFAULT):
    """``gradient_zero * (1 + |K|) / length_scale``."""
    return tol.gradient_zero * (1.0 + np.abs(K)) / length_scale


def _decide(s, grad, K, identities_ok, ladder_error, length_scale, tol: Tolerances):
    """Classification from sorted singular values and the jet scalars."""
    thr = float(rank_threshold(s[0], tol, ladder_error))
    rank = int(np.count_nonzero(s > thr))
    gap = None
    if 0 < rank < 3:
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    gthr = float(gradient_threshold(K, length_scale, tol))
    flags = []
    if not identities_ok:
        return Symmetry.INDETERMINATE, rank, gap, "curvature-jet identities failed; point skipped", ["jet"]
    if rank == 0:
        return Symmetry.THREE_PARAM, rank, gap, "rank 0", flags
    if rank == 3:
        return Symmetry.TRIVIAL, rank, gap, "rank 3", flags
    if rank == 1:
        return Symmetry.INDETERMINATE, rank, gap, "apparent rank 1 (excluded in theory); tolerance artifact", ["rank1"]
    if grad > gthr:
        return Symmetry.ONE_PARAM, rank, gap, "rank 2 with non-zero gradient", flags
    return Symmetry.INDETERMINATE, rank, gap, "rank 2 with vanishing gradient", ["grad"]


def classify_point(
    chart: MetricChart,
    p,
    tol: Tolerances = DEFAULT,
    frame: FrameField | None = None,
) -> Classification:
    """Classify the local infinitesimal isometries at ``p`` by the rank of the curvature matrix.

    The rank uses :func:`rank_threshold` with the ladder-error estimate of
    :func:`jet_with_error`.  Rank 0 gives ``ThreeParam``, rank 3 ``Trivial`` and rank 2 with
    ``|(K1, K2)|`` above ``gradient_threshold`` gives ``OneParam``.
    Everything else, including any apparent rank 1 and points where the
    curvature-jet identities fail, is ``Indeterminate``.
    """
    p = np.asarray(p, dtype=float)
    j, err = jet_with_error(chart, p[None, :], frame)
    return classify_values({k: v[0] for k, v in j.items()}, float(err[0]), chart.length_scale, tol, tuple(p.tolist()))


def classify_values(j: dict, ladder_error: float, length_scale: float, tol: Tolerances = DEFAULT, point=()) -> Classification:
    """Classification from the jet values at one point (see :func:`classify_point`)."""
    M = matrix_from_jet(j)
    s = np.linalg.svd(M, compute_uv=False)
    ok = max(float(j["res_K12"]), float(j["res_K112"]), float(j["res_K122"])) <= tol.jet_symmetry
    grad = float(np.hypot(j["K1"], j["K2"]))
    kind, rank, gap, reason, flags = _decide(s, grad, float(j["K"]), ok, ladder_error, length_scale, tol)
    return Classification(kind, rank, gap, tuple(float(x) for x in s), grad, point, reason, flags)
