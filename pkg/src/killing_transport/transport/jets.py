"""Value types for jets and transport results."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..tolerances import DEFAULT


@dataclass(frozen=True)
class Jet2D:
    """Frame components ``(xi1, xi2)`` of ``X`` and the scalar ``xi12`` with ``A = -xi12 J``.

    ``J`` is the positive quarter rotation (``J e1 = e2``), so ``xi12 = A^1_2``.
    """

    xi1: float
    xi2: float
    xi12: float

    @classmethod
    def from_array(cls, a) -> "Jet2D":
        a = np.asarray(a, dtype=float).reshape(3)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.xi1, self.xi2, self.xi12])

    def rotated(self, phi: float) -> "Jet2D":
        """Components in the frame rotated by ``phi`` (``xi12`` is unchanged)."""
        c, s = np.cos(phi), np.sin(phi)
        return Jet2D(c * self.xi1 + s * self.xi2, -s * self.xi1 + c * self.xi2, self.xi12)

    def A(self) -> np.ndarray:
        return np.array([[0.0, self.xi12], [-self.xi12, 0.0]])


@dataclass(frozen=True)
class JetND:
    """``X`` in coordinate components and ``A`` in frame components.

    ``mode`` is ``"skew"`` for infinitesimal isometries and ``"affine"`` when
    ``A`` may carry a symmetric part.
    """

    X: np.ndarray
    A: np.ndarray
    mode: str = "skew"

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        if self.mode not in ("skew", "affine"):
            raise ValueError("mode must be 'skew' or 'affine'")
        n = self.X.shape[-1]
        if self.A.shape[-2:] != (n, n):
            raise ValueError("A must be n x n")
        if self.mode == "skew" and np.max(np.abs(self.A + np.swapaxes(self.A, -1, -2)), initial=0.0) > 1e-8:
            raise ValueError("skew-mode jet needs a skew-symmetric A")

    @property
    def dim(self) -> int:
        return self.X.shape[-1]


@dataclass
class TransportMatrix:
    """Fundamental solution ``U(t)`` of the 3x3 transport system."""

    t: np.ndarray
    U: np.ndarray
    frame: str = "chart"
    det_drift: float = field(init=False)
    steps: int = field(init=False)

    def __post_init__(self):
        self.det_drift = float(np.max(np.abs(np.linalg.det(self.U) - 1.0)))
        self.steps = len(self.t) - 1

    @property
    def final(self) -> np.ndarray:
        return self.U[-1]

    def apply(self, jet) -> np.ndarray:
        v = jet.as_array() if isinstance(jet, Jet2D) else np.asarray(jet, dtype=float)
        return self.U @ v

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.final)

    def fixed_basis(self, tol: float = DEFAULT.fixed_direction) -> list[np.ndarray]:
        return fixed_directions(self.final, tol)

    def rotation_angle(self) -> float | None:
        """Angle in ``[0, pi]`` of the complex eigenvalue pair, if there is one."""
        ev = self.eigenvalues
        k = int(np.argmax(np.abs(ev.imag)))
        if abs(ev[k].imag) < 1e-12:
            return None
        return float(np.arccos(np.clip(ev[k].real, -1.0, 1.0)))

    def report(self, tol: float = DEFAULT.fixed_direction) -> dict:
        basis = self.fixed_basis(tol)
        return {
            "U": self.final.tolist(),
            "det_drift": self.det_drift,
            "fixed_dims": len(basis),
            "fixed_basis": [b.tolist() for b in basis],
            "frame": self.frame,
            "steps": self.steps,
            "deviation_from_identity": float(np.max(np.abs(self.final - np.eye(3)))),
        }


def fixed_directions(U, tol: float = DEFAULT.fixed_direction) -> list[np.ndarray]:
    """Orthonormal basis of ``{xi : U xi = xi}`` from the SVD of ``U - I``.

    Singular values below ``tol * ||U||_2`` count as zero.  Each returned
    vector is normalised with its largest entry positive.
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    _, sv, vt = np.linalg.svd(U - np.eye(n))
    thr = tol * np.linalg.norm(U, 2)
    out = []
    for s, v in zip(sv, vt):
        if s <= thr:
            k = int(np.argmax(np.abs(v)))
            out.append(v * np.sign(v[k]))
    return out
