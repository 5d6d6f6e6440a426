import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from hivelab.errors import DomainError, InfeasibleError, InvariantError
from hivelab.polytope import (LinearInequalitySystem, augmented_variables, box_system,
                              build_augmented_polytope, build_gt_polytope, build_hive_polytope,
                              build_torus_polytope, chebyshev_center, condition_on,
                              estimate_volume, hit_and_run, interior_point, is_feasible,
                              simplex_system)


def test_box_and_simplex_rejection():
    est = estimate_volume(box_system([0, 0, 0], [1, 2, 3]), "rejection", budget=200_000, seed=1)
    assert est.log_volume == pytest.approx(math.log(6), abs=1e-9)
    est = estimate_volume(simplex_system(4), "rejection", budget=500_000, seed=2)
    assert abs(est.log_volume + gammaln(5)) < 3 * est.stderr + 1e-3


@pytest.mark.parametrize("d,seed", [(6, 3), (8, 4)])
def test_simplex_annealed(d, seed):
    est = estimate_volume(simplex_system(d), "annealed", budget=2_000_000, seed=seed)
    assert abs(est.log_volume + gammaln(d + 1)) < 3 * est.stderr
    assert est.stderr < 0.1


def test_zero_dimensional_and_empty():
    s = LinearInequalitySystem(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]),
                               np.array([[1.0]]), np.array([0.5]))
    est = estimate_volume(s)
    assert est.dimension == 0 and est.log_volume == 0.0
    empty = box_system([0, 0], [1, 1]).with_rows(np.array([[1.0, 0.0]]), np.array([-1.0]))
    assert not is_feasible(empty)
    assert estimate_volume(empty).log_volume == -math.inf
    with pytest.raises(InfeasibleError):
        interior_point(empty)


def test_rejection_zero_hits_flag():
    # a thin diagonal slab keeps the full unit bounding box
    thin = box_system([0, 0], [1, 1]).with_rows(
        np.array([[1.0, -1.0], [-1.0, 1.0]]), np.array([1e-7, 1e-7]))
    est = estimate_volume(thin, "rejection", budget=10_000, seed=0)
    assert "zero_hits" in est.flags and est.log_volume == -math.inf
    assert est.info["log_upper_bound_95"] > math.log(2e-7)


def test_hrep_round_trip():
    s = build_gt_polytope([3, 1, -4])
    t = LinearInequalitySystem.from_hrep_text(s.to_hrep_text())
    assert np.allclose(s.A, t.A) and np.allclose(s.b, t.b)
    torus = build_torus_polytope(2, [1, 2, 3])
    t2 = LinearInequalitySystem.from_hrep_text(torus.to_hrep_text())
    assert np.allclose(torus.A_eq, t2.A_eq) and t2.dimension == 3


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_hit_and_run_stays_inside(seed):
    s = build_gt_polytope([4, 1, 0, -5])
    xs, zero = hit_and_run(s, steps=200, seed=seed, chains=3)
    assert xs.shape == (200, 3, s.d)
    assert np.all(xs.reshape(-1, s.d) @ s.A.T <= s.b + 1e-9)


def test_hit_and_run_uniform_on_square():
    xs, _ = hit_and_run(box_system([0, 0], [1, 1]), steps=20_000, seed=5, thin=3)
    assert np.allclose(xs.mean(axis=0), 0.5, atol=0.02)
    assert np.allclose(xs.var(axis=0), 1 / 12, atol=0.01)


def test_chebyshev_center_of_box():
    s = box_system([0, 0], [2, 4])
    c, r = chebyshev_center(s.A, s.b)
    assert r == pytest.approx(1.0) and c[0] == pytest.approx(1.0)


def test_hive_polytope_dimensions():
    for n in (2, 3, 4, 5):
        lam = np.arange(n, 0, -1, dtype=float)
        lam -= lam.mean()
        s = build_hive_polytope(lam, lam, 2 * lam)
        assert s.d == (n - 1) * (n - 2) // 2
        assert s.m == 3 * n * (n - 1) // 2
    with pytest.raises(InvariantError):
        build_hive_polytope([1, -1], [1, -1], [3, 0])


def test_augmented_and_torus_shapes():
    n = 3
    names = augmented_variables(n)
    assert len(names) == len(set(names))
    s = build_augmented_polytope([2, 0, -2], [2, 0, -2], [2, 0, -2], 0.5)
    assert s.meta["radius"] == 0.5 and s.d == len(names)
    t = build_torus_polytope(3, [1, 1, 1])
    assert t.d == 9 and t.m == 27 and t.dimension == 8
    with pytest.raises(DomainError):
        build_torus_polytope(3, [1, -1, 1])
    with pytest.raises(DomainError):
        build_torus_polytope(3, [1, 1, 1], "sideways")


def test_condition_on_pins_coordinates():
    s = build_gt_polytope([2, 0, -2])
    c = condition_on(s, [0], [0.5])
    assert c.dimension == s.dimension - 1
    assert c.contains(interior_point(c).x)


def test_torus_homogeneity_exact_dimension_two():
    a = estimate_volume(build_torus_polytope(2, [1, 1, 1]), "rejection", budget=400_000, seed=1)
    b = estimate_volume(build_torus_polytope(2, [2, 2, 2]), "rejection", budget=400_000, seed=2)
    z = (b.log_volume - a.log_volume - 3 * math.log(2)) / math.hypot(a.stderr, b.stderr)
    assert abs(z) < 3
