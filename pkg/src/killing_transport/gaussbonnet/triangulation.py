"""Triangulations of closed chart surfaces and edge builders."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..curves import SampledCurve, reparam_arclength
from ..errors import ConfigError, InconsistentOrientation, NotClosed
from ..manifold import MetricChart


def straight_edge(chart: MetricChart, a, b, samples: int = 64) -> SampledCurve:
    """The coordinate segment from ``a`` to ``b``, in arc length."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a

    def raw(s):
        return a + np.asarray(s, dtype=float)[..., None] * d

    def vel(s):
        return np.broadcast_to(d, np.shape(s) + d.shape)

    return reparam_arclength(chart, raw, samples, (0.0, 1.0), velocity=vel, closed=False)


def polyline_edge(chart: MetricChart, points, samples: int = 64) -> SampledCurve:
    """Edge through the given chart points (unwrapped).

    Two points give a coordinate segment; more are joined by a cubic spline
    in the chord-length parameter.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) < 2:
        raise ConfigError("an edge needs at least two sample points")
    if len(P) == 2:
        return straight_edge(chart, P[0], P[1], samples)
    chord = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(P, axis=0), axis=1))])
    if np.any(np.diff(chord) <= 0):
        raise ConfigError("edge sample points must be distinct")
    spline = CubicSpline(chord, P, axis=0)
    return reparam_arclength(chart, spline, samples, (0.0, chord[-1]), velocity=spline.derivative(), closed=False)


# --- spheres with a tilted polar axis ------------------------------------------


def _axis_basis(axis) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    helper = np.eye(3)[int(np.argmin(np.abs(a)))]
    b = np.cross(helper, a)
    b /= np.linalg.norm(b)
    c = np.cross(a, b)
    return np.stack([b, c, a])


def sphere_coordinates(x, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Polar coordinates ``(u, v)`` of unit vectors ``x`` about ``axis``.

    The frame ``(b, c, axis)`` is right-handed, so the chart orientation is
    the outward one for every axis.
    """
    B = _axis_basis(axis)
    y = np.asarray(x, dtype=float) @ B.T
    u = np.arccos(np.clip(y[..., 2], -1.0, 1.0))
    v = np.arctan2(y[..., 1], y[..., 0])
    return np.stack([u, v], -1)


def great_circle_edge(
    chart: MetricChart,
    p,
    direction,
    angle: float,
    axis=(0.0, 0.0, 1.0),
    samples: int = 64,
) -> SampledCurve:
    """Great-circle arc from the unit vector ``p`` towards ``direction``.

    ``chart`` must be a round sphere chart; ``angle`` is the arc's central
    angle.  The arc is expressed in polar coordinates about ``axis`` with ``v`` unwrapped.
    """
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    w = np.asarray(direction, dtype=float)
    w = w - (w @ p) * p
    w = w / np.linalg.norm(w)
    # continuous v along a dense reference track, used to pick the branch
    s_ref = np.linspace(0.0, float(angle), 4097)
    v_ref = np.unwrap(sphere_coordinates(np.cos(s_ref)[:, None] * p + np.sin(s_ref)[:, None] * w, axis)[:, 1])

    def raw(s):
        s = np.asarray(s, dtype=float)
        uv = sphere_coordinates(np.cos(s)[..., None] * p + np.sin(s)[..., None] * w, axis)
        near = np.interp(s, s_ref, v_ref)
        uv[..., 1] = near + np.mod(uv[..., 1] - near + np.pi, 2 * np.pi) - np.pi
        return uv

    return reparam_arclength(chart, raw, samples, (0.0, float(angle)), closed=False)


# --- triangulations --------------------------------------------------------------


@dataclass
class TriEdge:
    """An edge curve with its endpoint vertex ids (0-based)."""

    curve: SampledCurve
    start: int
    end: int
    points: np.ndarray  # unwrapped sample points used to build the curve

    def directed(self, sign: int) -> SampledCurve:
        return self.curve if sign > 0 else self.curve.reversed()


class Triangulation:
    """Vertices, edge curves and triangles of signed 1-based edge references.

    A triangle ``[a, b, c]`` runs along edge ``|a|`` forwards when ``a > 0``
    and backwards when ``a < 0``, then ``|b|`` and ``|c|``; the boundary is
    positively oriented with respect to the chart.
    """

    def __init__(self, chart: MetricChart, vertices, edges: list[TriEdge], triangles):
        self.chart = chart
        self.vertices = np.asarray(vertices, dtype=float)
        self.edges = list(edges)
        self.triangles = np.asarray(triangles, dtype=int).reshape(-1, 3)

    @property
    def v(self) -> int:
        return len(self.vertices)

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def f(self) -> int:
        return len(self.triangles)

    @property
    def chi(self) -> int:
        return self.v - self.e + self.f

    def counts(self) -> dict:
        return {"v": self.v, "e": self.e, "f": self.f, "chi": self.chi}

    def _endpoints(self, ref: int) -> tuple[int, int]:
        ed = self.edges[abs(ref) - 1]
        return (ed.start, ed.end) if ref > 0 else (ed.end, ed.start)

    def validate(self, closed: bool = True) -> None:
        """Check edge chaining and, for closed surfaces, the two-sided edge use.

        Raises
        ------
        InconsistentOrientation
            If a triangle's edges do not chain head to tail, or an edge is
            used twice in the same direction.
        NotClosed
            If ``closed`` and some edge is not shared by exactly two triangles.
        """
        n = self.e
        uses = np.zeros((n, 2), dtype=int)
        for k, tri in enumerate(self.triangles):
            for ref in tri:
                if ref == 0 or abs(ref) > n:
                    raise ConfigError(f"triangle {k} references missing edge {ref}")
                uses[abs(ref) - 1, 0 if ref > 0 else 1] += 1
            for a in range(3):
                if self._endpoints(tri[a])[1] != self._endpoints(tri[(a + 1) % 3])[0]:
                    raise InconsistentOrientation(f"triangle {k}: edges {tri[a]} and {tri[(a + 1) % 3]} do not chain")
        if np.any(uses > 1):
            bad = int(np.argmax(np.max(uses, axis=1))) + 1
            raise InconsistentOrientation(f"edge {bad} is used twice in the same direction")
        if closed:
            if np.any(uses.sum(axis=1) != 2):
                bad = int(np.argmax(uses.sum(axis=1) != 2)) + 1
                raise NotClosed(f"edge {bad} is not shared by two triangles; the surface has a boundary")
            if 3 * self.f != 2 * self.e:
                raise NotClosed(f"3f = {3 * self.f} differs from 2e = {2 * self.e}")

    # --- JSON ---------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "edges": [{"from": ed.start, "to": ed.end, "samples": np.asarray(ed.points).tolist()} for ed in self.edges],
            "triangles": self.triangles.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, chart: MetricChart, data: dict, samples: int = 64) -> "Triangulation":
        try:
            verts = data["vertices"]
            edges = [
                TriEdge(polyline_edge(chart, e["samples"], samples), int(e["from"]), int(e["to"]), np.asarray(e["samples"], float))
                for e in data["edges"]
            ]
            tris = data["triangles"]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed triangulation: {exc}") from exc
        return cls(chart, verts, edges, tris)

    @classmethod
    def from_json(cls, chart: MetricChart, text: str, samples: int = 64) -> "Triangulation":
        return cls.from_dict(chart, json.loads(text), samples)


def grid_triangulation(chart: MetricChart, nu: int, nv: int, samples: int = 32) -> Triangulation:
    """Tensor-grid triangulation of a doubly periodic chart.

    Each grid cell is split along its diagonal into two triangles, giving
    ``v = nu nv``, ``e = 3 nu nv`` and ``f = 2 nu nv``.
    """
    dom = chart.domain
    if chart.dim != 2 or not all(dom.periodic):
        raise ConfigError("grid triangulations need a doubly periodic surface chart")
    (u0, _), (v0, _) = dom.bounds
    du, dv = dom.period[0] / nu, dom.period[1] / nv
    vid = lambda i, j: (i % nu) * nv + (j % nv)  # noqa: E731
    verts = [[u0 + i * du, v0 + j * dv] for i in range(nu) for j in range(nv)]
    edges: list[TriEdge] = []
    index = {}
    for i in range(nu):
        for j in range(nv):
            a = np.array(verts[vid(i, j)])
            for kind, step, (di, dj) in (("h", (du, 0.0), (1, 0)), ("v", (0.0, dv), (0, 1)), ("d", (du, dv), (1, 1))):
                b = a + np.array(step)
                index[kind, i, j] = len(edges) + 1
                edges.append(TriEdge(straight_edge(chart, a, b, samples), vid(i, j), vid(i + di, j + dj), np.stack([a, b])))
    tris = []
    for i in range(nu):
        for j in range(nv):
            h, v, d = index["h", i, j], index["v", (i + 1) % nu, j], index["d", i, j]
            tris.append([h, v, -d])
            tris.append([d, -index["h", i, (j + 1) % nv], -index["v", i, j]])
    return Triangulation(chart, verts, edges, tris)
