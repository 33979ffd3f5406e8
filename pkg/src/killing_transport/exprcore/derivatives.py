"""Finite-difference machinery.

All derivatives are central differences of 4th order combined with one
Richardson step (ratio 2), i.e. ``(16 D(h) - D(2h)) / 15``.  The two stencils
are merged into a single weight vector so a derivative costs one vectorised
evaluation of the field on the union of offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainExceeded, ExprError
from .parser import Expr, parse_expr

ACCURACY = 4
RICHARDSON_ORDER = 6  # effective order after one extrapolation step
MAX_ORDER = 5


@lru_cache(maxsize=None)
def central_weights(order: int, accuracy: int = ACCURACY) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Unit-step central stencil for the ``order``-th derivative."""
    if order == 0:
        return (0,), (1.0,)
    p = (order + 1) // 2 - 1 + accuracy // 2
    offsets = list(range(-p, p + 1))
    weights = _solve_exact(
        [[Fraction(o) ** k for o in offsets] for k in range(len(offsets))],
        [Fraction(factorial(order)) if k == order else Fraction(0) for k in range(len(offsets))],
    )
    pairs = [(o, w) for o, w in zip(offsets, weights) if w != 0]
    return tuple(o for o, _ in pairs), tuple(float(w) for _, w in pairs)


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[r][n] / m[r][r] for r in range(n)]


@lru_cache(maxsize=None)
def richardson_stencil(orders: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Merged tensor-product stencil for the mixed partial with per-axis ``orders``.

    Returns ``(offsets, weights)`` with offsets in units of the per-axis step;
    the caller divides by ``prod(h_a ** orders[a])``.
    """
    total = sum(orders)
    axes = [central_weights(k) for k in orders]
    acc: dict[tuple, float] = {}
    for scale, factor in ((1, 16.0 / 15.0), (2, -1.0 / 15.0 / 2.0**total)):
        for combo in product(*[list(zip(o, w)) for o, w in axes]):
            off = tuple(scale * c[0] for c in combo)
            acc[off] = acc.get(off, 0.0) + factor * float(np.prod([c[1] for c in combo]))
    offs = np.array([k for k, w in acc.items() if w != 0.0], dtype=float)
    wts = np.array([w for w in acc.values() if w != 0.0])
    return offs, wts


class StencilSet:
    """Several derivatives sharing one evaluation of the field.

    ``orders_list`` holds one per-axis order tuple per requested derivative.
    """

    def __init__(self, orders_list: Sequence[tuple[int, ...]]):
        self.orders_list = [tuple(o) for o in orders_list]
        index: dict[tuple, int] = {}
        rows = []
        for orders in self.orders_list:
            offs, wts = richardson_stencil(orders)
            row = {}
            for o, w in zip(map(tuple, offs), wts):
                if o not in index:
                    index[o] = len(index)
                row[index[o]] = w
            rows.append(row)
        self.offsets = np.array(list(index), dtype=float)
        self.weights = np.zeros((len(rows), len(index)))
        for k, row in enumerate(rows):
            for s, w in row.items():
                self.weights[k, s] = w

    def points(self, X: np.ndarray, steps: np.ndarray) -> np.ndarray:
        return X[..., None, :] + self.offsets * steps

    def combine(self, values: np.ndarray, batch_ndim: int, steps: np.ndarray) -> np.ndarray:
        """Contract field values on the stencil points into derivatives.

        ``values`` has shape ``batch + (S,) + value_shape``; the result has
        shape ``batch + (K,) + value_shape`` with K the number of derivatives.
        """
        scale = np.array([np.prod(steps ** np.array(o)) for o in self.orders_list])
        w = self.weights / scale[:, None]
        out = np.tensordot(values, w, axes=([batch_ndim], [1]))
        return np.moveaxis(out, -1, batch_ndim)

    def apply(self, fn: Callable, X: np.ndarray, steps) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        steps = np.broadcast_to(np.asarray(steps, dtype=float), X.shape[-1:])
        values = fn(self.points(X, steps))
        return self.combine(values, X.ndim - 1, steps)


@lru_cache(maxsize=None)
def gradient_stencil(n: int) -> StencilSet:
    return StencilSet([tuple(int(a == b) for b in range(n)) for a in range(n)])


def gradient(fn: Callable, X: np.ndarray, steps) -> np.ndarray:
    """Coordinate gradient of a (possibly vector-valued) vectorised field.

    Returns shape ``X.shape[:-1] + (n,) + value_shape``.
    """
    X = np.asarray(X, dtype=float)
    return gradient_stencil(X.shape[-1]).apply(fn, X, steps)


# --- domain handling -----------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box with optional periodic axes."""

    bounds: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]
    period: tuple[float | None, ...]

    @classmethod
    def make(cls, bounds, periodic=None, period=None) -> "Domain":
        bounds = tuple((float(a), float(b)) for a, b in bounds)
        n = len(bounds)
        periodic = tuple(bool(p) for p in (periodic or [False] * n))
        if period is None:
            period = [None] * n
        period = tuple(
            (float(p) if p is not None else (b - a)) if per else None
            for p, per, (a, b) in zip(period, periodic, bounds)
        )
        return cls(bounds, periodic, period)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def extent(self) -> np.ndarray:
        return np.array([p if per else b - a for (a, b), per, p in zip(self.bounds, self.periodic, self.period)])

    def wrap(self, X: np.ndarray) -> np.ndarray:
        if not any(self.periodic):
            return X
        X = np.array(X, dtype=float, copy=True)
        for a, (per, p) in enumerate(zip(self.periodic, self.period)):
            if per:
                lo = self.bounds[a][0]
                col = X[..., a]
                out = (col < lo) | (col >= lo + p)
                if np.any(out):
                    col[out] = lo + np.mod(col[out] - lo, p)
        return X

    def check(self, X: np.ndarray) -> None:
        for a, (per, (lo, hi)) in enumerate(zip(self.periodic, self.bounds)):
            if per:
                continue
            col = X[..., a]
            bad = (col < lo) | (col > hi) | ~np.isfinite(col)
            if np.any(bad):
                where = np.argwhere(bad)[0]
                pt = X[tuple(where)]
                raise DomainExceeded(
                    f"point {np.round(pt, 6).tolist()} leaves the domain on axis {a} ({lo}, {hi})", point=pt
                )

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        ok = np.ones(X.shape[:-1], dtype=bool)
        for a, (per, (lo, hi)) in enumerate(zip(self.periodic, self.bounds)):
            if not per:
                ok &= (X[..., a] >= lo) & (X[..., a] <= hi)
        return ok

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        """Chart distance between two points modulo periodic identifications."""
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        for a, (per, p) in enumerate(zip(self.periodic, self.period)):
            if per:
                d[..., a] = d[..., a] - p * np.round(d[..., a] / p)
        return float(np.linalg.norm(d))


# --- scalar fields ---------------------------------------------------------------


@dataclass(frozen=True)
class DerivativeResult:
    value: float | np.ndarray
    steps: tuple[float, ...]
    accuracy_order: int
    stencil_points: int

    def __float__(self) -> float:
        return float(self.value)


class ScalarField:
    """A real field on a chart domain with numerical partial derivatives.

    Parameters
    ----------
    evaluator : callable
        Maps an array of points ``(..., n)`` to values ``(...)``.
    domain : Domain
    h : float or sequence, optional
        Base differentiation step per axis; defaults to 1e-3 of the axis extent.
    """

    def __init__(self, evaluator: Callable, domain: Domain, h=None, source: str | None = None):
        self._evaluator = evaluator
        self.domain = domain
        self.h = np.asarray(1e-3 * domain.extent if h is None else np.broadcast_to(h, (domain.dim,)), dtype=float)
        self.source = source

    @classmethod
    def from_expr(cls, expr: Expr | str, domain: Domain, variables=None, h=None) -> "ScalarField":
        if isinstance(expr, str):
            expr = parse_expr(expr)
        names = tuple(variables) if variables is not None else _default_names(domain.dim)
        bad = expr.variables() - set(names)
        if bad:
            raise ExprError(f"variables {sorted(bad)} are not coordinates of a {domain.dim}-dimensional chart")

        def evaluator(X):
            with np.errstate(all="ignore"):
                out = expr.evaluate({nm: X[..., i] for i, nm in enumerate(names)})
            return np.broadcast_to(out, X.shape[:-1]).astype(float)

        return cls(evaluator, domain, h=h, source=str(expr))

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        self.domain.check(X)
        return self.evaluate_wrapped(self.domain.wrap(X))

    def evaluate_wrapped(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on points already checked and wrapped into the domain."""
        out = self._evaluator(X)
        if not np.all(np.isfinite(out)):
            raise ExprError(f"field {self.source or ''} is not finite on the requested points")
        return out

    def step_for(self, order: int) -> np.ndarray:
        """Step per axis for a derivative of total ``order`` (doubling per order)."""
        return self.h * 2.0 ** (max(order, 1) - 1)


def _default_names(n: int) -> tuple[str, ...]:
    return ("u", "v") if n == 2 else tuple(f"x{i}" for i in range(1, n + 1))


def partial_derivative(f: ScalarField, point, multi_index: Sequence[int], h=None) -> DerivativeResult:
    """Numerical partial derivative ``d^k f / dx_{i1} ... dx_{ik}`` at ``point``.

    The multi-index lists axis numbers (0-based, repeats allowed, at most 5
    entries).  ``h`` overrides the per-axis step; by default the step for a
    total order ``k`` is ``f.h * 2**(k-1)``.
    """
    multi_index = list(multi_index)
    if len(multi_index) > MAX_ORDER:
        raise ValueError(f"derivative order {len(multi_index)} exceeds {MAX_ORDER}")
    if any(a < 0 or a >= f.dim for a in multi_index):
        raise ValueError(f"axis index out of range for a {f.dim}-dimensional field")
    orders = tuple(multi_index.count(a) for a in range(f.dim))
    steps = f.step_for(len(multi_index)) if h is None else np.broadcast_to(np.asarray(h, float), (f.dim,))
    stencil = StencilSet([orders])
    X = np.asarray(point, dtype=float)
    value = stencil.apply(f, X, steps)[..., 0]
    if value.ndim == 0:
        value = float(value)
    return DerivativeResult(value, tuple(float(s) for s in steps), RICHARDSON_ORDER, len(stencil.offsets))
