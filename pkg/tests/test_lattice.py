from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hivelab import lattice
from hivelab.errors import DegenerateCellError, DomainError
from hivelab.hive import ContinuumHive, lift


def quad_field(n, c=1.0, affine=(0.0, 0.0, 0.0)):
    x, y = np.indices((n + 1, n + 1)).astype(float)
    f = -c * (x * x + y * y - x * y) + affine[0] * x + affine[1] * y + affine[2]
    f[x > y] = np.nan
    return f


@pytest.mark.parametrize("kind", lattice.KINDS)
def test_offsets_shape(kind):
    offs = lattice.rhombus_offsets(kind)
    assert len(offs) == 4
    # opposite vertices share a midpoint
    (a1, o1, a2, o2) = [np.array(p) for p in offs]
    assert np.array_equal(a1 + a2, o1 + o2)


def test_bad_kind():
    with pytest.raises(DomainError):
        lattice.rhombus_offsets(3)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_rhombus_counts(n):
    g = lattice.TriangleGrid(n)
    for kind in lattice.KINDS:
        assert len(lattice.enumerate_rhombi(g, kind)) == n * (n - 1) // 2
    assert len(g) == (n + 1) * (n + 2) // 2


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), c=st.floats(0.1, 10), a=st.tuples(*[st.floats(-5, 5)] * 3))
def test_quadratic_has_constant_deltas(n, c, a):
    f = quad_field(n, c, a)
    for kind in lattice.KINDS:
        _, _, d = lattice.rhombus_deltas(f, kind)
        assert np.allclose(d, -c, atol=1e-9 * (1 + c * n * n))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**31))
def test_deltas_are_linear(n, seed):
    rng = np.random.default_rng(seed)
    f, g = rng.normal(size=(2, n + 1, n + 1))
    for kind in lattice.KINDS:
        d1 = lattice.rhombus_deltas(f, kind)[2]
        d2 = lattice.rhombus_deltas(g, kind)[2]
        d3 = lattice.rhombus_deltas(2 * f - g, kind)[2]
        assert np.allclose(d3, 2 * d1 - d2)


def test_concavity_reports_violations():
    f = quad_field(4, 1.0)
    ok, viol = lattice.is_rhombus_concave(f)
    assert ok and not viol
    f[1, 2] += 5.0
    ok, viol = lattice.is_rhombus_concave(f)
    assert not ok
    assert all(d > 0 for _, d in viol)
    assert all(len(r.vertices) == 4 for r, _ in viol)


def test_torus_deltas_of_periodic_quadratic_free_field():
    # a constant field has zero second differences everywhere on the torus
    f = np.full((4, 4), 3.0)
    for kind in lattice.KINDS:
        _, _, d = lattice.rhombus_deltas(f, kind, torus=True)
        assert d.size == 16 and np.allclose(d, 0)


@pytest.mark.parametrize("a", range(0, 5))
def test_partition_areas_and_order(a):
    cells = lattice.dyadic_partition(a)
    m = 2 ** a
    assert len(cells) == m + m * (m - 1) // 2
    assert sum(c.area for c in cells) == Fraction(1, 2)
    for k, c in enumerate(cells):
        assert lattice.cell_index(c) == k
        if a < 4:
            kids = c.children()
            assert sum(k.area for k in kids) == c.area
            assert all(k.parent() == c for k in kids)


@settings(max_examples=200, deadline=None)
@given(p=st.integers(0, 64), q=st.integers(0, 64), a=st.integers(0, 5))
def test_locate_point_matches_lattice(p, q, a):
    if p > q:
        p, q = q, p
    n = 64
    cell = lattice.locate_point(Fraction(p, n), Fraction(q, n), a)
    idx = lattice.locate_lattice(np.array([p]), np.array([q]), n, a)[0]
    assert lattice.cell_index(cell) == idx
    assert cell.contains(Fraction(p, n), Fraction(q, n))


def test_locate_outside():
    with pytest.raises(DomainError):
        lattice.locate_point(0.7, 0.2, 1)


def test_cell_masses_quadratic_exact():
    h = lift(ContinuumHive.quadratic(2.5), 32)
    for a in range(4):
        m, counts = lattice.cell_masses(h.values, a)
        assert np.all(counts > 0)
        assert np.allclose(m, -2.5)


def test_degenerate_cell():
    h = lift(ContinuumHive.quadratic(1.0), 4)
    sq = lattice.DyadicCell("square", 1, 0, 1)
    with pytest.raises(DegenerateCellError) as ei:
        lattice.cell_hessian_mass(h, sq, lattice.HORIZONTAL)
    assert ei.value.cell == sq and ei.value.kind == lattice.HORIZONTAL
    assert lattice.cell_hessian_mass(h, sq, lattice.SQUARE) == pytest.approx(-1.0)


def test_aggregate_is_area_weighted_mean():
    rng = np.random.default_rng(0)
    fine = rng.normal(size=(len(lattice.dyadic_partition(3)), 3))
    coarse = lattice.aggregate_masses(fine, 3, 2)
    for pc in lattice.dyadic_partition(2):
        kids = pc.children()
        w = np.array([float(k.area / pc.area) for k in kids])
        vals = np.array([fine[lattice.cell_index(k)] for k in kids])
        assert np.allclose(coarse[lattice.cell_index(pc)], w @ vals)
    total = lattice.aggregate_masses(fine, 3, 0)[0]
    areas = lattice.cell_areas(3)
    assert np.allclose(total, areas @ fine / areas.sum())
