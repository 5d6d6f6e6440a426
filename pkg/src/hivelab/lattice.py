"""Triangular and toroidal lattices, unit rhombi and the dyadic partition.

Coordinates are ``(x, y)`` with the triangle ``T_n = {0 <= x <= y <= n}``.
Fields on ``T_n`` are stored as ``(n+1, n+1)`` float arrays indexed
``f[x, y]``; entries with ``x > y`` are ignored (conventionally NaN).
Torus fields are ``(n, n)`` arrays with periodic indexing.

Every unit rhombus is the union of two lattice triangles sharing an edge.
The endpoints of the shared edge are the obtuse vertices, the other two are
the acute ones, and the second difference of a field over the rhombus is

    Delta(e) = f(acute_1) + f(acute_2) - f(obtuse_1) - f(obtuse_2),

which is <= 0 for rhombus-concave fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateCellError, DomainError

# Rhombus families, named by the direction of the shared edge.
SQUARE = 0        # shared edge along (1,1): vertices v, v+ex, v+ey, v+ed
HORIZONTAL = 1    # shared edge along (1,0): vertices v, v+ey, v+ed, v+ey+ed
VERTICAL = 2      # shared edge along (0,1): vertices v, v+ex, v+ed, v+ex+ed
KINDS = (SQUARE, HORIZONTAL, VERTICAL)
KIND_NAMES = {SQUARE: "square", HORIZONTAL: "horizontal", VERTICAL: "vertical"}

# Vertex offsets in cyclic (acute, obtuse, acute, obtuse) order.
_OFFSETS = {
    SQUARE: ((1, 0), (1, 1), (0, 1), (0, 0)),
    HORIZONTAL: ((0, 0), (0, 1), (1, 2), (1, 1)),
    VERTICAL: ((0, 0), (1, 0), (2, 1), (1, 1)),
}
_SIGNS = (1.0, -1.0, 1.0, -1.0)


def rhombus_offsets(kind: int):
    """Vertex offsets of a rhombus of ``kind`` relative to its anchor."""
    if kind not in _OFFSETS:
        raise DomainError(f"unknown rhombus kind {kind!r}")
    return _OFFSETS[kind]


@dataclass(frozen=True, order=True)
class GridPoint:
    x: int
    y: int

    def __add__(self, other):
        return GridPoint(self.x + other[0], self.y + other[1])

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class TriangleGrid:
    """Lattice points of ``T_n``."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("n must be nonnegative")

    def contains(self, p) -> bool:
        x, y = p
        return 0 <= x <= y <= self.n

    def points(self) -> Iterator[GridPoint]:
        for x in range(self.n + 1):
            for y in range(x, self.n + 1):
                yield GridPoint(x, y)

    def mask(self) -> np.ndarray:
        """Boolean ``(n+1, n+1)`` array, true on ``T_n``."""
        x, y = np.indices((self.n + 1, self.n + 1))
        return x <= y

    def __len__(self):
        return (self.n + 1) * (self.n + 2) // 2


@dataclass(frozen=True)
class TorusGrid:
    """The ``n x n`` discrete torus."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("torus side must be >= 1")

    def contains(self, p) -> bool:
        return True

    def points(self) -> Iterator[GridPoint]:
        for x in range(self.n):
            for y in range(self.n):
                yield GridPoint(x, y)

    def __len__(self):
        return self.n * self.n


@dataclass(frozen=True)
class Rhombus:
    kind: int
    anchor: GridPoint
    vertices: tuple  # (acute, obtuse, acute, obtuse)

    @property
    def acute(self):
        return self.vertices[0], self.vertices[2]

    @property
    def obtuse(self):
        return self.vertices[1], self.vertices[3]


def _anchor_range(grid, kind):
    """Sorted integer arrays (ax, ay) of valid anchors for ``kind``."""
    n = grid.n
    if isinstance(grid, TorusGrid):
        ax, ay = np.indices((n, n))
        return ax.ravel(), ay.ravel()
    offs = np.array(rhombus_offsets(kind))
    ax, ay = np.indices((n + 1, n + 1))
    ax, ay = ax.ravel(), ay.ravel()
    ok = np.ones(ax.shape, bool)
    for dx, dy in offs:
        x, y = ax + dx, ay + dy
        ok &= (x >= 0) & (x <= y) & (y <= n)
    return ax[ok], ay[ok]


def enumerate_rhombi(grid, kind: int) -> list:
    """All unit rhombi of ``kind`` inside ``grid``, ordered by anchor.

    On a torus the vertices are reduced mod ``n``.
    """
    offs = rhombus_offsets(kind)
    ax, ay = _anchor_range(grid, kind)
    wrap = isinstance(grid, TorusGrid)
    out = []
    for x, y in zip(ax.tolist(), ay.tolist()):
        verts = []
        for dx, dy in offs:
            vx, vy = x + dx, y + dy
            if wrap:
                vx, vy = vx % grid.n, vy % grid.n
            verts.append(GridPoint(vx, vy))
        out.append(Rhombus(kind, GridPoint(x, y), tuple(verts)))
    return out


def _lookup(f, p):
    x, y = p
    if x < 0 or y < 0 or x >= f.shape[0] or y >= f.shape[1]:
        raise DomainError(f"vertex {tuple(p)} outside the field")
    v = f[x, y]
    if not np.isfinite(v):
        raise DomainError(f"no value at vertex {tuple(p)}")
    return float(v)


def rhombus_second_difference(f, e: Rhombus) -> float:
    """Acute-pair sum minus obtuse-pair sum of ``f`` over ``e``."""
    f = np.asarray(f, dtype=float)
    return sum(s * _lookup(f, v) for s, v in zip(_SIGNS, e.vertices))


def rhombus_deltas(f, kind: int, torus: bool = False):
    """Vectorized second differences of every rhombus of one kind.

    Parameters
    ----------
    f : ndarray
        Field on ``T_n`` (shape ``(n+1, n+1)``) or on the torus (``(n, n)``,
        with ``torus=True``).
    kind : int
        Rhombus family.

    Returns
    -------
    ax, ay : ndarray of int
        Anchors in lexicographic order.
    delta : ndarray
    """
    f = np.asarray(f, dtype=float)
    if torus:
        grid = TorusGrid(f.shape[0])
    else:
        grid = TriangleGrid(f.shape[0] - 1)
    ax, ay = _anchor_range(grid, kind)
    d = np.zeros(ax.shape)
    for s, (dx, dy) in zip(_SIGNS, rhombus_offsets(kind)):
        if torus:
            d += s * f[(ax + dx) % grid.n, (ay + dy) % grid.n]
        else:
            d += s * f[ax + dx, ay + dy]
    return ax, ay, d


def is_rhombus_concave(f, tol: float | None = None, torus: bool = False):
    """Check every rhombus inequality on ``T_n`` (or the torus).

    Parameters
    ----------
    f : ndarray
        Field values.
    tol : float, optional
        Absolute tolerance. Defaults to ``1e-12 * max|f|``.

    Returns
    -------
    ok : bool
    violations : list of (Rhombus, float)
    """
    f = np.asarray(f, dtype=float)
    if tol is None:
        vals = f if torus else f[TriangleGrid(f.shape[0] - 1).mask()]
        tol = 1e-12 * max(float(np.max(np.abs(vals), initial=0.0)), 1.0)
    viol = []
    n = f.shape[0] if torus else f.shape[0] - 1
    for kind in KINDS:
        ax, ay, d = rhombus_deltas(f, kind, torus=torus)
        for k in np.flatnonzero(d > tol):
            x, y = int(ax[k]), int(ay[k])
            verts = []
            for dx, dy in rhombus_offsets(kind):
                vx, vy = x + dx, y + dy
                if torus:
                    vx, vy = vx % n, vy % n
                verts.append(GridPoint(vx, vy))
            viol.append((Rhombus(kind, GridPoint(x, y), tuple(verts)), float(d[k])))
    return not viol, viol


# ---------------------------------------------------------------- dyadic cells

@dataclass(frozen=True)
class DyadicCell:
    """A cell of the level-``a`` dyadic partition of ``T``.

    Triangles are ``{k s <= x <= y <= (k+1) s}`` with ``s = 2**-a``;
    squares are ``[i s, (i+1) s) x (j s, (j+1) s]`` with ``j > i``.
    """

    shape: str  # "triangle" or "square"
    level: int
    i: int
    j: int  # equals i for triangles

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2 ** self.level)

    @property
    def area(self) -> Fraction:
        s = self.side
        return s * s / 2 if self.shape == "triangle" else s * s

    @property
    def corners(self):
        s = self.side
        if self.shape == "triangle":
            k = self.i
            return ((k * s, k * s), (k * s, (k + 1) * s), ((k + 1) * s, (k + 1) * s))
        i, j = self.i, self.j
        return ((i * s, j * s), ((i + 1) * s, j * s),
                ((i + 1) * s, (j + 1) * s), (i * s, (j + 1) * s))

    def children(self):
        a = self.level + 1
        if self.shape == "triangle":
            k = self.i
            return [DyadicCell("triangle", a, 2 * k, 2 * k),
                    DyadicCell("triangle", a, 2 * k + 1, 2 * k + 1),
                    DyadicCell("square", a, 2 * k, 2 * k + 1)]
        return [DyadicCell("square", a, 2 * self.i + di, 2 * self.j + dj)
                for di in (0, 1) for dj in (0, 1)]

    def parent(self):
        if self.level == 0:
            return None
        a = self.level - 1
        if self.shape == "triangle":
            return DyadicCell("triangle", a, self.i // 2, self.i // 2)
        pi, pj = self.i // 2, self.j // 2
        if pi == pj:
            return DyadicCell("triangle", a, pi, pi)
        return DyadicCell("square", a, pi, pj)

    def contains(self, x, y) -> bool:
        """Membership of a point of ``T`` (exact for Fractions)."""
        return locate_point(x, y, self.level) == self


def dyadic_partition(a: int) -> list:
    """Cells of level ``a``: ``2**a`` triangles then squares in (i, j) order."""
    if a < 0:
        raise DomainError("level must be >= 0")
    m = 2 ** a
    cells = [DyadicCell("triangle", a, k, k) for k in range(m)]
    cells += [DyadicCell("square", a, i, j) for i in range(m) for j in range(i + 1, m)]
    return cells


def cell_index(cell: DyadicCell) -> int:
    """Position of ``cell`` in ``dyadic_partition(cell.level)``."""
    m = 2 ** cell.level
    if cell.shape == "triangle":
        return cell.i
    i, j = cell.i, cell.j
    # squares with first index < i come first
    before = i * (m - 1) - i * (i - 1) // 2
    return m + before + (j - i - 1)


def locate_point(x, y, a: int) -> DyadicCell:
    """The level-``a`` cell containing the point ``(x, y)`` of ``T``."""
    m = 2 ** a
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= y <= 1):
        raise DomainError("point outside T")
    i = int(x * m // 1)
    yj = y * m
    j = int(-((-yj) // 1)) - 1
    if j > i:
        return DyadicCell("square", a, i, j)
    k = min(i, m - 1)
    return DyadicCell("triangle", a, k, k)


def locate_lattice(px, py, n: int, a: int):
    """Vectorized cell indices for lattice points ``(px, py)`` of ``T_n``.

    Uses exact integer arithmetic on ``x = px / n``.
    """
    m = 2 ** a
    px = np.asarray(px, dtype=np.int64)
    py = np.asarray(py, dtype=np.int64)
    i = (px * m) // n
    j = -((-py * m) // n) - 1
    sq = j > i
    # square index, same ordering as cell_index
    before = i * (m - 1) - i * (i - 1) // 2
    sq_idx = m + before + (j - i - 1)
    tri_idx = np.minimum(i, m - 1)
    return np.where(sq, sq_idx, tri_idx)


def cell_rhombus_sums(f, a: int):
    """Per-cell sums and counts of rhombus second differences.

    Rhombi are assigned to the cell containing their anchor.

    Returns
    -------
    sums, counts : ndarray, shape (n_cells, 3)
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0] - 1
    ncell = len(dyadic_partition(a))
    sums = np.zeros((ncell, 3))
    counts = np.zeros((ncell, 3), dtype=np.int64)
    for kind in KINDS:
        ax, ay, d = rhombus_deltas(f, kind)
        if ax.size == 0:
            continue
        idx = locate_lattice(ax, ay, n, a)
        sums[:, kind] = np.bincount(idx, weights=d, minlength=ncell)
        counts[:, kind] = np.bincount(idx, minlength=ncell)
    return sums, counts


def cell_masses(f, a: int):
    """Mean rhombus second difference per cell and kind.

    Each rhombus stands for the Hessian density over its own area (one
    lattice cell at scale ``1/n``), so the cell average of the Hessian is
    estimated by the mean second difference of the rhombi anchored in
    the cell. Cells with no rhombus of a kind get NaN.

    Returns
    -------
    masses : ndarray, shape (n_cells, 3)
    counts : ndarray, shape (n_cells, 3)
    """
    sums, counts = cell_rhombus_sums(f, a)
    with np.errstate(invalid="ignore", divide="ignore"):
        masses = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return masses, counts


def cell_hessian_mass(h, cell: DyadicCell, kind: int) -> float:
    """Average Hessian of kind ``kind`` over ``cell`` for a discrete hive.

    Parameters
    ----------
    h : DiscreteHive or ndarray
        Hive values at the ``n**2`` scaling.
    cell : DyadicCell
    kind : int

    Raises
    ------
    DegenerateCellError
        If no rhombus of this kind is anchored in the cell at this ``n``.
    """
    f = getattr(h, "values", h)
    rhombus_offsets(kind)
    masses, counts = cell_masses(f, cell.level)
    idx = cell_index(cell)
    if counts[idx, kind] == 0:
        raise DegenerateCellError(
            f"cell {cell} holds no {KIND_NAMES[kind]} rhombus at n={np.shape(f)[0] - 1}",
            cell=cell, kind=kind)
    return float(masses[idx, kind])


def aggregate_masses(masses: np.ndarray, a_fine: int, a: int) -> np.ndarray:
    """Area-weighted averages of level-``a_fine`` cell values on level ``a``.

    The coarse value is the conditional expectation of the fine field, so
    each parent equals the area-weighted mean of its children exactly.
    """
    if a > a_fine:
        raise DomainError("target level must not exceed the source level")
    cur = np.asarray(masses, dtype=float)
    for lev in range(a_fine, a, -1):
        fine = dyadic_partition(lev)
        coarse = dyadic_partition(lev - 1)
        acc = np.zeros((len(coarse),) + cur.shape[1:])
        for c, val in zip(fine, cur):
            p = c.parent()
            w = float(c.area / p.area)
            acc[cell_index(p)] += w * val
        cur = acc
    return cur


def cell_areas(a: int) -> np.ndarray:
    return np.array([float(c.area) for c in dyadic_partition(a)])
