"""Classification over a tensor grid of chart points."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..manifold import FrameField, MetricChart
from ..manifold.geometry import LADDER_STEPS, _ladder_plan
from ..tolerances import DEFAULT, Tolerances
from .kmatrix import Classification, Symmetry, classify_values, jet_with_error


def stencil_reach(chart: MetricChart) -> np.ndarray:
    """Per-axis distance the curvature-jet stencils reach from a point."""
    plan = _ladder_plan(chart.dim, tuple(float(s) for s in LADDER_STEPS))
    h = np.broadcast_to(np.asarray(chart.h, dtype=float), (chart.dim,))
    # the frame's connection forms add one more value-and-gradient stencil at h
    return (np.max(np.abs(plan["levels"][-1]), axis=0) * plan["unit"] + 4.0) * h


@dataclass
class GridSpec:
    """A ``nu x nv`` tensor grid; ``None`` ranges mean the whole usable domain."""

    nu: int = 20
    nv: int = 20
    u_range: tuple | None = None
    v_range: tuple | None = None

    def points(self, chart: MetricChart) -> np.ndarray:
        if chart.dim != 2:
            raise ConfigError("region scans are defined for surfaces")
        reach = stencil_reach(chart) * 1.05
        axes = []
        for a, (n, rng) in enumerate(((self.nu, self.u_range), (self.nv, self.v_range))):
            lo, hi = chart.domain.bounds[a]
            if rng is not None:
                axes.append(np.linspace(float(rng[0]), float(rng[1]), n))
            elif chart.domain.periodic[a]:
                axes.append(lo + chart.domain.period[a] * np.arange(n) / n)
            else:
                if hi - lo <= 2 * reach[a]:
                    raise ConfigError(f"axis {a} is too short for the curvature stencils")
                axes.append(np.linspace(lo + reach[a], hi - reach[a], n))
        U, V = np.meshgrid(*axes, indexing="ij")
        return np.stack([U, V], -1)


@dataclass
class ScanResult:
    grid: np.ndarray  # (nu, nv, 2)
    classes: list  # row-major list of Classification
    histogram: dict
    rank_histogram: dict
    rank1_points: list = field(default_factory=list)
    indeterminate_points: list = field(default_factory=list)

    def kinds(self) -> np.ndarray:
        return np.array([c.kind.value for c in self.classes]).reshape(self.grid.shape[:-1])

    def summary(self) -> dict:
        return {
            "points": len(self.classes),
            "histogram": self.histogram,
            "rank_histogram": self.rank_histogram,
            "rank1_points": self.rank1_points,
            "indeterminate_points": len(self.indeterminate_points),
        }


def scan_region(
    chart: MetricChart,
    grid: GridSpec | None = None,
    tol: Tolerances = DEFAULT,
    frame: FrameField | None = None,
) -> ScanResult:
    """Classify every point of a grid; apparent rank-1 points are listed separately."""
    grid = grid or GridSpec()
    P = grid.points(chart)
    flat = P.reshape(-1, 2)
    jets, err = jet_with_error(chart, flat, frame)
    classes: list[Classification] = []
    for k, x in enumerate(flat):
        j = {name: v[k] for name, v in jets.items()}
        classes.append(classify_values(j, float(err[k]), chart.length_scale, tol, tuple(float(c) for c in x)))
    hist = Counter(c.kind.value for c in classes)
    ranks = Counter(c.rank for c in classes)
    return ScanResult(
        grid=P,
        classes=classes,
        histogram={s.value: hist.get(s.value, 0) for s in Symmetry},
        rank_histogram={r: ranks.get(r, 0) for r in range(4)},
        rank1_points=[list(c.point) for c in classes if c.rank == 1],
        indeterminate_points=[list(c.point) for c in classes if c.kind is Symmetry.INDETERMINATE],
    )
