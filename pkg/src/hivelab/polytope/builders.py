"""H-representations of hive, augmented-hive, GT and torus polytopes."""
from __future__ import annotations

import numpy as np

from .. import lattice
from ..errors import DomainError, InvariantError
from ..spectra import ball_constraints_I
from .system import LinearInequalitySystem


def _vec(v):
    return np.asarray(v, dtype=float).ravel()


def _rows_from_fixed(points, fixed, index, kinds_offsets, d):
    """Turn rhombus inequalities into rows ``a . x <= b``.

    ``fixed`` maps points to constants, ``index`` maps points to variables.
    """
    rows, rhs, labels = [], [], []
    for kind, anchors in kinds_offsets:
        offs = lattice.rhombus_offsets(kind)
        for ax, ay in anchors:
            a = np.zeros(d)
            const = 0.0
            for s, (dx, dy) in zip((1.0, -1.0, 1.0, -1.0), offs):
                p = (ax + dx, ay + dy)
                if p in index:
                    a[index[p]] += s
                else:
                    const += s * fixed[p]
            rows.append(a)
            rhs.append(-const)
            labels.append((kind, ax, ay))
    A = np.array(rows, dtype=float).reshape(len(rows), d)
    return A, np.array(rhs, dtype=float), labels


def _hive_anchors(n):
    out = []
    for kind in lattice.KINDS:
        ax, ay = lattice._anchor_range(lattice.TriangleGrid(n), kind)
        out.append((kind, list(zip(ax.tolist(), ay.tolist()))))
    return out


def _check_spectra(lam, mu, nu=None):
    lam, mu = _vec(lam), _vec(mu)
    if lam.size != mu.size or (nu is not None and _vec(nu).size != lam.size):
        raise DomainError("spectra must have equal lengths")
    if nu is not None:
        nu = _vec(nu)
        scale = max(1.0, float(np.max(np.abs(np.concatenate([lam, mu, nu])))))
        if abs(lam.sum() + mu.sum() - nu.sum()) > 1e-9 * lam.size * scale:
            raise InvariantError("boundary mismatch: sum(lam) + sum(mu) != sum(nu)")
    return lam, mu, nu


def hive_boundary_values(lam, mu, nu=None):
    """Fixed boundary values of ``T_n`` as a dict ``{(x, y): value}``."""
    lam, mu = _vec(lam), _vec(mu)
    n = lam.size
    fixed = {}
    left = np.concatenate([[0.0], np.cumsum(lam)])
    for y in range(n + 1):
        fixed[(0, y)] = left[y]
    top = left[n] + np.concatenate([[0.0], np.cumsum(mu)])
    for x in range(n + 1):
        fixed[(x, n)] = top[x]
    if nu is not None:
        diag = np.concatenate([[0.0], np.cumsum(_vec(nu))])
        for k in range(n):
            fixed[(k, k)] = diag[k]
    return fixed


def build_hive_polytope(lam, mu, nu) -> LinearInequalitySystem:
    """Hives with boundary spectra ``(lam, mu, nu)``; variables are interior values."""
    lam, mu, nu = _check_spectra(lam, mu, nu)
    n = lam.size
    fixed = hive_boundary_values(lam, mu, nu)
    pts = [(x, y) for x in range(1, n) for y in range(x + 1, n)]
    index = {p: i for i, p in enumerate(pts)}
    A, b, labels = _rows_from_fixed(pts, fixed, index, _hive_anchors(n), len(pts))
    return LinearInequalitySystem(A, b, names=tuple(pts), labels=tuple(labels),
                                  meta={"kind": "hive", "n": n})


def augmented_variables(n: int):
    """Free points of the augmented polytope, in a fixed order.

    Hive interior points, then diagonal points ``(k, k)`` for ``0 < k < n``,
    then strictly lower points ``(x, y)`` with ``x > y >= 1``.
    """
    hive = [(x, y) for x in range(1, n) for y in range(x + 1, n)]
    diag = [(k, k) for k in range(1, n)]
    lower = [(x, y) for y in range(1, n) for x in range(y + 1, n + 1)]
    return hive + diag + lower


def build_augmented_polytope(lam, mu, nu_center=None, radius=None) -> LinearInequalitySystem:
    """Augmented hives with fixed ``lam, mu`` and free diagonal.

    With ``nu_center`` and ``radius`` the diagonal partial sums are confined
    to the ball ``|sum_{k<=i} (nu'_k - nu_k)| <= radius``.
    """
    lam, mu, _ = _check_spectra(lam, mu)
    n = lam.size
    fixed = hive_boundary_values(lam, mu)
    for x in range(n + 1):
        fixed[(x, 0)] = 0.0
    pts = augmented_variables(n)
    index = {p: i for i, p in enumerate(pts)}
    d = len(pts)
    groups = _hive_anchors(n)
    for kind in (lattice.HORIZONTAL, lattice.VERTICAL):
        offs = lattice.rhombus_offsets(kind)
        anchors = []
        for x in range(n + 1):
            for y in range(n + 1):
                if all(0 <= x + dx <= n and 0 <= y + dy <= n and x + dx >= y + dy
                       for dx, dy in offs):
                    anchors.append((x, y))
        groups.append((kind, anchors))
    A, b, labels = _rows_from_fixed(pts, fixed, index, groups, d)
    sys = LinearInequalitySystem(A, b, names=tuple(pts), labels=tuple(labels),
                                 meta={"kind": "augmented", "n": n})
    if nu_center is not None:
        if radius is None:
            raise DomainError("radius is required with nu_center")
        Ab, bb = ball_constraints_I(nu_center, radius)
        # prefix sum i+1 of nu' is the diagonal value at (i+1, i+1)
        L = np.zeros((Ab.shape[0], d))
        for i in range(n - 1):
            L[i, index[(i + 1, i + 1)]] = 1.0
            L[n - 1 + i, index[(i + 1, i + 1)]] = -1.0
        sys = sys.with_rows(L, bb)
        sys.meta.update(radius=float(radius), nu_center=_vec(nu_center).tolist())
    return sys


def build_gt_polytope(nu) -> LinearInequalitySystem:
    """GT patterns with top row ``nu``; variables are rows ``n-1, ..., 1``."""
    nu = _vec(nu)
    n = nu.size
    names = [(k, i) for k in range(n - 1, 0, -1) for i in range(k)]
    index = {p: j for j, p in enumerate(names)}
    d = len(names)
    rows, rhs = [], []

    def term(k, i):
        return ("c", nu[i]) if k == n else ("v", index[(k, i)])

    for k in range(1, n):
        for i in range(k):
            # row_{k+1}(i) >= row_k(i) >= row_{k+1}(i+1)
            for big, small in ((term(k + 1, i), term(k, i)), (term(k, i), term(k + 1, i + 1))):
                a = np.zeros(d)
                c = 0.0
                if small[0] == "v":
                    a[small[1]] += 1
                else:
                    c -= small[1]
                if big[0] == "v":
                    a[big[1]] -= 1
                else:
                    c += big[1]
                rows.append(a)
                rhs.append(c)
    return LinearInequalitySystem(np.array(rows).reshape(-1, d), np.array(rhs),
                                  names=tuple(names), meta={"kind": "gt", "n": n})


def build_torus_polytope(n: int, s, variant: str = "sum_zero") -> LinearInequalitySystem:
    """Fields on the ``n x n`` torus with ``Delta_i g <= s_i`` for every rhombus.

    ``variant`` is ``"sum_zero"`` (sum of values is zero) or ``"pinned"``
    (value at the origin is zero).
    """
    s = _vec(s)
    if s.size != 3:
        raise DomainError("s must have three components")
    if np.any(s < 0):
        raise DomainError("s must be nonnegative")
    if n < 1:
        raise DomainError("n must be >= 1")
    grid = lattice.TorusGrid(n)
    d = n * n
    rows, rhs, labels = [], [], []
    for kind in lattice.KINDS:
        offs = lattice.rhombus_offsets(kind)
        for x in range(n):
            for y in range(n):
                a = np.zeros(d)
                for sg, (dx, dy) in zip((1.0, -1.0, 1.0, -1.0), offs):
                    a[((x + dx) % n) * n + (y + dy) % n] += sg
                rows.append(a)
                rhs.append(s[kind])
                labels.append((kind, x, y))
    names = tuple((x, y) for x in range(n) for y in range(n))
    if variant in ("sum_zero", "SumZero"):
        Ae = np.ones((1, d))
    elif variant in ("pinned", "Pinned"):
        Ae = np.zeros((1, d))
        Ae[0, 0] = 1.0
    else:
        raise DomainError(f"unknown torus variant {variant!r}")
    del grid
    return LinearInequalitySystem(np.array(rows), np.array(rhs), Ae, np.zeros(1),
                                  names=names, labels=tuple(labels),
                                  meta={"kind": "torus", "n": n, "s": s.tolist(),
                                        "variant": variant})
