"""Reference numpy implementation of the linear RK4 kernel."""

from __future__ import annotations

import numpy as np


def rk4_linear(q_nodes: np.ndarray, q_mid: np.ndarray, dt: float, y0: np.ndarray) -> np.ndarray:
    """Classical RK4 for ``Y' = Q(t) Y`` on a uniform grid.

    Parameters
    ----------
    q_nodes : (M+1, d, d) array
        Coefficient matrix at the grid nodes.
    q_mid : (M, d, d) array
        Coefficient matrix at the interval midpoints.
    dt : float
        Grid spacing.
    y0 : (d, k) array
        Initial value.

    Returns
    -------
    (M+1, d, k) array with ``Y[0] == y0``.
    """
    q_nodes = np.ascontiguousarray(q_nodes, dtype=float)
    q_mid = np.ascontiguousarray(q_mid, dtype=float)
    y = np.array(y0, dtype=float)
    M = q_mid.shape[0]
    out = np.empty((M + 1,) + y.shape)
    out[0] = y
    half = 0.5 * dt
    for i in range(M):
        qa, qm, qb = q_nodes[i], q_mid[i], q_nodes[i + 1]
        k1 = qa @ y
        k2 = qm @ (y + half * k1)
        k3 = qm @ (y + half * k2)
        k4 = qb @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[i + 1] = y
    return out
