"""Numerical thresholds shared by the library and the command line.

Library functions take these as keyword defaults; the CLI exposes every
field as a config key and records the values it used in the run manifest.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # relative (unit-floored) residual allowed in the curvature-jet identities
    jet_symmetry: float = 1e-4
    # |det U - 1| reported as healthy
    det_drift: float = 1e-9
    # singular values of U - I below this * ||U|| count as fixed directions
    fixed_direction: float = 1e-6
    # chart distance allowed between the two ends of a closed curve
    closure: float = 1e-8
    # speed below which arc-length reparameterisation refuses a curve
    zero_speed: float = 1e-12
    # relative singular-value threshold for the rank of the K matrix
    rank_rel: float = 1e-6
    # absolute singular-value floor for the rank (derivative-ladder noise)
    rank_abs: float = 1e-5
    # multiple of the estimated ladder error added to the rank floor
    rank_ladder: float = 10.0
    # (K1, K2) counts as zero below this * (1 + |K|) / length scale
    gradient_zero: float = 1e-6
    # |X| below this * max|X| is treated as a zero of the edge field
    edge_zero: float = 1e-6
    # geodesic curvature allowed for curves handed to the Jacobi check
    geodesic_kappa: float = 1e-6
    # distance of (pi/2)-multiples from an integer, relative to 2*pi
    edge_integer: float = 1e-6
    # cosine of the second principal angle counted as a 2-dim intersection
    intersection: float = 1e-8
    # |pi - |exterior angle|| below this is a cusp
    vertex_angle: float = 1e-8
    # how often (in RK4 steps) moving frames are re-orthonormalised
    reorthonormalize_every: int = 64

    def as_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "Tolerances":
        return replace(self, **changes)

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


DEFAULT = Tolerances()
