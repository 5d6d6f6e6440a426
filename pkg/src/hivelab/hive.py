"""Discrete hives, augmented hives, GT patterns and continuum hives.

A discrete hive of size ``n`` is a rhombus-concave field on ``T_n`` whose
boundary increments are three spectra::

    h(0, k) - h(0, k-1) = lam[k]     (left side,  x = 0)
    h(k, n) - h(k-1, n) = mu[k]      (top side,   y = n)
    h(k, k) - h(k-1, k-1) = nu[k]    (diagonal)

Augmented hives live on the full square ``[0, n]^2`` with values stored
as ``a[x, y]``. The upper triangle ``x <= y`` is a hive; the row ``y = 0``
is identically zero; on the lower triangle ``x >= y`` the south-west
differences ``g(x, y) = a[x, y] - a[x-1, y-1]`` form a GT pattern whose
row of length ``k`` is ``(g(n-k+1, 1), ..., g(n, k))``. The top row is
``g(k, k) = nu[k]``. Every non-square unit rhombus of the lower triangle
encodes one interlacing inequality.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lattice
from ._kernel import kernel_rule
from .errors import DomainError, InvariantError
from .spectra import BoundaryProfile, SpectrumVec


def _vals(h):
    v = getattr(h, "values", None)
    return np.asarray(h if v is None else v, dtype=float)


def _tri_tol(values, tol):
    if tol is not None:
        return tol
    m = np.nanmax(np.abs(values)) if np.any(np.isfinite(values)) else 0.0
    return 1e-12 * max(float(m), 1.0)


class DiscreteHive:
    """Values on ``T_n`` stored as an ``(n+1, n+1)`` array ``v[x, y]``."""

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainError("hive values must be a square (n+1)x(n+1) array")
        mask = lattice.TriangleGrid(v.shape[0] - 1).mask()
        if not np.all(np.isfinite(v[mask])):
            raise InvariantError("hive values must be finite on T_n")
        v[~mask] = np.nan
        v.setflags(write=False)
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    def __getitem__(self, p):
        x, y = p
        if not 0 <= x <= y <= self.n:
            raise DomainError(f"{p} not in T_{self.n}")
        return float(self.values[x, y])

    def deltas(self, kind):
        return lattice.rhombus_deltas(self.values, kind)[2]

    def to_json(self) -> dict:
        flat = [None if not np.isfinite(t) else float(t) for t in self.values.ravel()]
        return {"n": self.n, "values": flat}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["n"])
        vals = obj["values"]
        arr = np.full((n + 1, n + 1), np.nan)
        if len(vals) == (n + 1) ** 2:
            flat = np.array([np.nan if t is None else t for t in vals], dtype=float)
            arr = flat.reshape(n + 1, n + 1)
        elif len(vals) == (n + 1) * (n + 2) // 2:
            it = iter(vals)
            for x in range(n + 1):
                for y in range(x, n + 1):
                    arr[x, y] = next(it)
        else:
            raise DomainError("hive JSON has the wrong number of values")
        return cls(arr)

    def __eq__(self, other):
        if not isinstance(other, DiscreteHive):
            return NotImplemented
        return np.array_equal(self.values, other.values, equal_nan=True)

    def __repr__(self):
        return f"DiscreteHive(n={self.n})"


@dataclass
class HiveReport:
    ok: bool
    boundary_errors: list = field(default_factory=list)  # (side, k, got, expected)
    violations: list = field(default_factory=list)  # (Rhombus, delta)

    def to_json(self):
        return {
            "ok": self.ok,
            "boundary_errors": [
                {"side": s, "k": k, "got": g, "expected": e}
                for s, k, g, e in self.boundary_errors],
            "violations": [
                {"kind": r.kind, "anchor": [r.anchor.x, r.anchor.y], "delta": d}
                for r, d in self.violations],
        }


def boundary_of(h):
    """Boundary increment sequences ``(lam, mu, nu)`` of a hive."""
    v = getattr(h, "values", h)
    n = v.shape[0] - 1
    k = np.arange(n + 1)
    lam = np.diff(v[0, k])
    mu = np.diff(v[k, n])
    nu = np.diff(v[k, k])
    return lam, mu, nu


def validate_hive(h, lam, mu, nu, tol: float | None = None) -> HiveReport:
    """Check boundary increments, the corner value and every rhombus."""
    v = _vals(h)
    n = v.shape[0] - 1
    lam, mu, nu = (np.asarray(t, dtype=float).ravel() for t in (lam, mu, nu))
    if not (lam.size == mu.size == nu.size == n):
        raise DomainError("spectra lengths do not match the hive size")
    tol = _tri_tol(v, tol)
    btol = max(tol, 1e-9 * max(1.0, float(np.max(np.abs(np.concatenate([lam, mu, nu]))))))
    errs = []
    if abs(v[0, 0]) > btol:
        errs.append(("corner", 0, float(v[0, 0]), 0.0))
    for side, got, exp in zip(("lam", "mu", "nu"), boundary_of(v), (lam, mu, nu)):
        for k in np.flatnonzero(np.abs(got - exp) > btol):
            errs.append((side, int(k) + 1, float(got[k]), float(exp[k])))
    _, viol = lattice.is_rhombus_concave(v, tol=tol)
    return HiveReport(not errs and not viol, errs, viol)


def hive_from_boundary(lam, mu, nu, interior=None):
    """Assemble a hive array from boundary spectra and interior values.

    ``interior`` maps the interior points in lexicographic order (see
    :func:`interior_points`); missing interior values are NaN.
    """
    lam, mu, nu = (np.asarray(t, dtype=float).ravel() for t in (lam, mu, nu))
    n = lam.size
    v = np.full((n + 1, n + 1), np.nan)
    v[0, :] = np.concatenate([[0.0], np.cumsum(lam)])
    v[:, n] = v[0, n] + np.concatenate([[0.0], np.cumsum(mu)])
    d = np.concatenate([[0.0], np.cumsum(nu)])
    if abs(d[-1] - v[n, n]) > 1e-9 * max(1.0, np.max(np.abs(v[0]))):
        raise InvariantError("corner mismatch: sum(lam) + sum(mu) != sum(nu)")
    v[np.arange(n + 1), np.arange(n + 1)] = d
    if interior is not None:
        pts = interior_points(n)
        interior = np.asarray(interior, dtype=float)
        if interior.size != len(pts):
            raise DomainError("wrong number of interior values")
        for (x, y), t in zip(pts, interior):
            v[x, y] = t
    return v


def interior_points(n: int):
    """Interior lattice points of ``T_n`` (not on any side), lexicographic."""
    return [(x, y) for x in range(1, n) for y in range(x + 1, n)]


# ----------------------------------------------------------------- GT patterns

class GTPattern:
    """Triangular array; ``rows[k-1]`` has ``k`` entries, the top row is last."""

    def __init__(self, rows, check: bool = True, tol: float = 1e-9):
        rows = [np.array(r, dtype=float).ravel() for r in rows]
        for k, r in enumerate(rows, start=1):
            if r.size != k:
                raise InvariantError(f"GT row {k} must have {k} entries")
        self.rows = rows
        if check:
            bad = self.interlacing_violations(tol)
            if bad:
                raise InvariantError(f"GT interlacing violated at {bad[:3]}")

    @property
    def n(self):
        return len(self.rows)

    @property
    def top(self):
        return self.rows[-1]

    def interlacing_violations(self, tol: float = 1e-9):
        bad = []
        scale = max(1.0, max((float(np.max(np.abs(r))) for r in self.rows), default=1.0))
        for k in range(1, self.n):
            up, lo = self.rows[k], self.rows[k - 1]
            for i in range(k):
                if not (up[i] + tol * scale >= lo[i] >= up[i + 1] - tol * scale):
                    bad.append((k, i))
        return bad

    def to_json(self):
        return [r.tolist() for r in self.rows]

    @classmethod
    def midpoint(cls, top):
        """The pattern whose rows are successive neighbour averages."""
        rows = [np.asarray(top, dtype=float)]
        while rows[0].size > 1:
            r = rows[0]
            rows.insert(0, 0.5 * (r[:-1] + r[1:]))
        return cls(rows)


class AugmentedHive:
    """Square array ``a[x, y]`` on ``[0, n]^2`` (see module docstring)."""

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainError("augmented hive must be square")
        if not np.all(np.isfinite(v)):
            raise InvariantError("augmented hive values must be finite")
        v.setflags(write=False)
        self.values = v

    @property
    def n(self):
        return self.values.shape[0] - 1

    def hive(self) -> DiscreteHive:
        return DiscreteHive(self.values)

    def gt_differences(self):
        """South-west differences on the lower triangle as GT rows."""
        v = self.values
        n = self.n
        rows = []
        for k in range(1, n + 1):
            rows.append(np.array([v[i + n - k, i] - v[i + n - k - 1, i - 1]
                                  for i in range(1, k + 1)]))
        return rows

    @classmethod
    def from_parts(cls, hive, gt: GTPattern):
        """Glue a hive and a GT pattern whose top row matches its diagonal."""
        h = _vals(hive)
        n = h.shape[0] - 1
        if gt.n != n:
            raise DomainError("GT pattern size does not match the hive")
        nu = boundary_of(h)[2]
        if not np.allclose(gt.top, nu, atol=1e-9 * max(1.0, np.max(np.abs(nu)))):
            raise InvariantError("GT top row differs from the hive diagonal increments")
        a = np.zeros((n + 1, n + 1))
        mask = lattice.TriangleGrid(n).mask()
        a[mask] = h[mask]
        for y in range(1, n + 1):
            for x in range(y + 1, n + 1):
                k = n - (x - y)
                a[x, y] = a[x - 1, y - 1] + gt.rows[k - 1][y - 1]
        return cls(a)

    def lower_rhombus_deltas(self):
        """Second differences of the non-square rhombi of the lower triangle."""
        v = self.values
        n = self.n
        out = []
        for kind in (lattice.HORIZONTAL, lattice.VERTICAL):
            offs = lattice.rhombus_offsets(kind)
            for x in range(n + 1):
                for y in range(n + 1):
                    pts = [(x + dx, y + dy) for dx, dy in offs]
                    if all(0 <= px <= n and 0 <= py <= n and px >= py for px, py in pts):
                        d = sum(s * v[p] for s, p in zip((1, -1, 1, -1), pts))
                        out.append(((kind, x, y), float(d)))
        return out

    def validate(self, lam=None, mu=None, tol=None):
        v = self.values
        tol = _tri_tol(v, tol)
        problems = []
        if np.any(np.abs(v[:, 0]) > tol):
            problems.append("row y=0 is not zero")
        ok, viol = lattice.is_rhombus_concave(v, tol=tol)
        problems += [f"hive rhombus {r.kind}@{tuple(r.anchor)}: {d:.3g}" for r, d in viol]
        problems += [f"lower rhombus {k}: {d:.3g}" for k, d in self.lower_rhombus_deltas() if d > tol]
        if lam is not None:
            l_, m_, _ = boundary_of(v)
            if not np.allclose(l_, lam, atol=tol) or not np.allclose(m_, mu, atol=tol):
                problems.append("boundary spectra mismatch")
        return not problems, problems


def extract_gt(a: AugmentedHive, tol: float = 1e-9) -> GTPattern:
    """GT pattern of south-west differences; interlacing re-verified."""
    return GTPattern(a.gt_differences(), check=True, tol=tol)


def example_augmented_hive(n: int = 4, c: float = 5.0) -> AugmentedHive:
    """Constant-Hessian hive glued to the midpoint GT pattern.

    With ``n=4, c=5`` every boundary spectrum is ``(15, 5, -5, -15)``.
    """
    h = lift(ContinuumHive.quadratic(c), n)
    gt = GTPattern.midpoint(boundary_of(h)[2])
    return AugmentedHive.from_parts(h, gt)


# -------------------------------------------------------------- continuum hives

def _quad_form(x, y):
    return x * x + y * y - x * y


def _pl_eval(F, x, y):
    """PL interpolation of lattice values ``F`` on ``T_m``, ``x,y`` in [0,1]."""
    m = F.shape[0] - 1
    X = np.clip(np.asarray(x, dtype=float) * m, 0.0, m)
    Y = np.clip(np.asarray(y, dtype=float) * m, 0.0, m)
    i = np.minimum(np.floor(X).astype(np.int64), m - 1)
    j = np.minimum(np.floor(Y).astype(np.int64), m - 1)
    u = X - i
    w = Y - j
    i1 = i + 1
    j1 = j + 1
    G = np.nan_to_num(F, nan=0.0)
    f00 = G[i, j]
    f11 = G[i1, j1]
    upper = (u <= w) | (i >= j)
    f01 = G[i, j1]
    f10 = G[i1, np.minimum(j, m)]
    a = f00 + w * (f01 - f00) + u * (f11 - f01)
    b = f00 + u * (f10 - f00) + w * (f11 - f10)
    return np.where(upper, a, b)


class ContinuumHive:
    """A function on ``T = {0 <= x <= y <= 1}`` given by a vectorized callable."""

    def __init__(self, func: Callable, name: str = "custom", hessian=None):
        self._func = func
        self.name = name
        self.hessian = hessian  # known constant Hessian density, if any

    def __call__(self, x, y):
        return self._func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    @classmethod
    def quadratic(cls, c: float = 1.0):
        """``c (y - (x^2 + y^2 - x y))``; all boundaries are ``c (t - t^2)``."""
        c = float(c)
        return cls(lambda x, y: c * (y - _quad_form(x, y)), name=f"quadratic(c={c})",
                   hessian=c)

    @classmethod
    def from_grid(cls, F, scaled: bool = True):
        """PL extension of lattice values on ``T_m``.

        ``scaled`` means ``F`` is at the ``m**2`` scaling of a discrete hive.
        """
        F = np.array(F, dtype=float)
        m = F.shape[0] - 1
        if m < 1:
            raise DomainError("grid must have m >= 1")
        if scaled:
            F = F / (m * m)
        F.setflags(write=False)
        return cls(lambda x, y: _pl_eval(F, x, y), name=f"pl(m={m})")

    @classmethod
    def from_discrete(cls, h: DiscreteHive):
        return cls.from_grid(h.values, scaled=True)

    def tabulate(self, m: int = 512) -> "ContinuumHive":
        """Freeze the function on a uniform grid of ``T_m``."""
        return ContinuumHive.from_grid(lift(self, m).values, scaled=True)

    def profiles(self):
        """Boundary profiles ``(alpha, beta, gamma)`` measured from their start corners."""
        f = self
        a = BoundaryProfile(lambda t: f(np.zeros_like(np.asarray(t, float)), t) - f(0.0, 0.0),
                            name="alpha")
        b = BoundaryProfile(lambda t: f(t, np.ones_like(np.asarray(t, float))) - f(0.0, 1.0),
                            name="beta")
        g = BoundaryProfile(lambda t: f(t, t) - f(0.0, 0.0), name="gamma")
        if self.hessian is not None:
            c = self.hessian
            a = b = g = BoundaryProfile.quadratic(c)
        return a, b, g


def lift(h, n: int) -> DiscreteHive:
    """Sample ``n**2 h(x/n, y/n)`` on ``T_n``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    x, y = np.indices((n + 1, n + 1))
    mask = x <= y
    vals = np.full((n + 1, n + 1), np.nan)
    vals[mask] = n * n * np.asarray(h(x[mask] / n, y[mask] / n), dtype=float)
    return DiscreteHive(vals)


def mollify(h, eps: float, order: int = 32, grid: int | None = None,
            chunk: int = 4096) -> ContinuumHive:
    """Smooth and strongly concavify a continuum hive.

    The result is ``(h * theta_eps)(A(x, y)) - eps q(x, y) + a(x, y)`` where
    ``A(x, y) = ((1-4 eps) x + eps, (1-4 eps) y + 3 eps)``,
    ``q = x^2 + y^2 - x y`` and ``a`` is the affine function that zeroes the
    three corners. The convolution uses one fixed tensor Gauss-Legendre rule
    for all evaluation points, so every rhombus second difference of the
    smoothed part is a positive combination of second differences of ``h``.

    Parameters
    ----------
    h : callable
        Rhombus-concave function on ``T``.
    eps : float
        In ``(0, 1/16)``.
    order : int
        Gauss-Legendre points per axis.
    grid : int, optional
        If given, tabulate the result on ``T_grid``.

    Returns
    -------
    ContinuumHive
    """
    if not 0 < eps < 1.0 / 16:
        raise DomainError("eps must lie in (0, 1/16)")
    u, w = kernel_rule(order)
    shift = eps * u  # (K, 2)
    s = 1.0 - 4.0 * eps

    def smooth(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shp = np.broadcast(x, y).shape
        px = (s * np.broadcast_to(x, shp) + eps).ravel()
        py = (s * np.broadcast_to(y, shp) + 3 * eps).ravel()
        out = np.empty(px.size)
        step = max(1, chunk * 1024 // u.shape[0])
        for lo in range(0, px.size, step):
            qx = px[lo:lo + step, None] - shift[None, :, 0]
            qy = py[lo:lo + step, None] - shift[None, :, 1]
            qx = np.clip(qx, 0.0, 1.0)
            qy = np.clip(qy, qx, 1.0)
            out[lo:lo + step] = np.asarray(h(qx, qy), dtype=float) @ w
        return out.reshape(shp)

    def g(x, y):
        return smooth(x, y) - eps * _quad_form(np.asarray(x, float), np.asarray(y, float))

    g00, g01, g11 = g(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 1.0]))
    a0 = -g00
    a2 = -g01 - a0
    a1 = -g11 - a0 - a2

    def out(x, y):
        return g(x, y) + a0 + a1 * np.asarray(x, float) + a2 * np.asarray(y, float)

    # a quadratic input stays quadratic: -(c s^2 + eps) q plus an affine part
    hess = getattr(h, "hessian", None)
    res = ContinuumHive(out, name=f"mollified(eps={eps})",
                        hessian=None if hess is None else hess * s * s + eps)
    if grid is not None:
        return res.tabulate(grid)
    return res
