"""Small linear programs: Chebyshev centre, bounding boxes, feasibility."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..errors import InfeasibleError, NumericError, UnboundedError

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class InteriorPoint:
    x: np.ndarray       # full coordinates
    z: np.ndarray       # reduced coordinates
    margin: float       # radius of the largest inscribed ball (reduced coords)


def _scale(A, b):
    return max(1.0, float(np.max(np.abs(b), initial=0.0)))


def chebyshev_center(A, b, cap: float | None = None):
    """Centre and radius of the largest ball inside ``{z : A z <= b}``.

    Returns ``(z, r)``; ``r`` may be negative when the set is empty
    (the LP then maximizes the worst normalized slack).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, k = A.shape
    norms = np.linalg.norm(A, axis=1)
    if cap is None:
        cap = 1e6 * _scale(A, b)
    c = np.zeros(k + 1)
    c[-1] = -1.0
    Aub = np.hstack([A, norms[:, None]])
    bounds = [(None, None)] * k + [(None, cap)]
    res = linprog(c, A_ub=Aub, b_ub=b, bounds=bounds, method="highs")
    if res.status == 2:
        raise InfeasibleError("Chebyshev LP infeasible")
    if res.status == 3:
        raise UnboundedError("Chebyshev LP unbounded")
    if res.status != 0:
        raise NumericError(f"Chebyshev LP failed: {res.message}")
    return res.x[:k], float(res.x[-1])


def interior_point(sys, tol: float = FEAS_TOL) -> InteriorPoint:
    """A strictly interior point of ``sys`` (Chebyshev centre in reduced coordinates).

    Raises
    ------
    InfeasibleError
        If the inscribed radius is at most ``tol`` times the data scale, i.e.
        the system is empty or has empty interior in its equality subspace.
    """
    red = sys.reduced
    scale = _scale(sys.A, sys.b)
    if red.const_violation > tol * scale:
        raise InfeasibleError("a constant row is violated")
    if red.k == 0:
        z = np.zeros(0)
        slack = red.b
        margin = float(np.min(slack, initial=np.inf))
        if margin < -tol * scale:
            raise InfeasibleError("the single point of the system violates a row")
        return InteriorPoint(red.to_full(z), z, margin)
    if red.A.shape[0] == 0:
        raise UnboundedError("no inequality rows constrain the subspace")
    z, r = chebyshev_center(red.A, red.b)
    if r <= tol * scale:
        raise InfeasibleError(f"no strictly interior point (margin {r:.3g})")
    return InteriorPoint(red.to_full(z), z, r)


def max_violation_min(sys) -> float:
    """``min_x max_i (A_i x - b_i)`` over the equality subspace (<= 0 iff feasible)."""
    red = sys.reduced
    if red.k == 0 or red.A.shape[0] == 0:
        return float(np.max(-red.b, initial=red.const_violation))
    m, k = red.A.shape
    c = np.zeros(k + 1)
    c[-1] = 1.0
    Aub = np.hstack([red.A, -np.ones((m, 1))])
    res = linprog(c, A_ub=Aub, b_ub=red.b, bounds=[(None, None)] * (k + 1), method="highs")
    if res.status != 0:
        raise NumericError(f"feasibility LP failed: {res.message}")
    return max(float(res.fun), red.const_violation)


def is_feasible(sys, tol: float = FEAS_TOL) -> bool:
    """Nonempty within ``tol`` (relative); lower-dimensional sets count."""
    return max_violation_min(sys) <= tol * _scale(sys.A, sys.b)


def bounding_box(A, b):
    """Coordinate-wise min and max over ``{z : A z <= b}`` by 2k LPs."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k = A.shape[1]
    lo = np.empty(k)
    hi = np.empty(k)
    for i in range(k):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(k)
            c[i] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * k, method="highs")
            if res.status == 3:
                raise UnboundedError(f"polytope unbounded along coordinate {i}")
            if res.status == 2:
                raise InfeasibleError("polytope is empty")
            if res.status != 0:
                raise NumericError(f"bounding LP failed: {res.message}")
            out[i] = sign * res.fun
    return lo, hi
