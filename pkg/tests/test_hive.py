import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hivelab import lattice
from hivelab._kernel import kernel_rule, theta, theta_unit
from hivelab.errors import DomainError, InvariantError
from hivelab.hive import (AugmentedHive, ContinuumHive, DiscreteHive, GTPattern, boundary_of,
                          example_augmented_hive, extract_gt, hive_from_boundary, lift, mollify,
                          validate_hive)
from hivelab.polytope import build_hive_polytope, hit_and_run
from hivelab.rmt import sample_sum_spectra


def sampled_hive(seed, n=4):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.normal(scale=3, size=n))[::-1]
    mu = np.sort(rng.normal(scale=3, size=n))[::-1]
    lam -= lam.mean()
    mu -= mu.mean()
    nu = sample_sum_spectra(lam, mu, 1, seed=seed)[0]
    x, _ = hit_and_run(build_hive_polytope(lam, mu, nu), steps=1, seed=seed, burn=100)
    return DiscreteHive(hive_from_boundary(lam, mu, nu, x[0])), (lam, mu, nu)


def test_quadratic_lift_is_a_hive():
    h = lift(ContinuumHive.quadratic(1.0), 6)
    lam, mu, nu = boundary_of(h)
    rep = validate_hive(h, lam, mu, nu)
    assert rep.ok
    assert np.allclose(lam, mu) and np.allclose(mu, nu)
    json.dumps(rep.to_json())


def test_validate_reports_problems():
    h = lift(ContinuumHive.quadratic(1.0), 4)
    lam, mu, nu = boundary_of(h)
    bad = h.values.copy()
    bad[1, 2] += 3.0
    rep = validate_hive(bad, lam, mu, nu)
    assert not rep.ok and rep.violations and not rep.boundary_errors
    rep = validate_hive(h, lam + [0.5, -0.5, 0, 0], mu, nu)
    assert not rep.ok and rep.boundary_errors
    with pytest.raises(DomainError):
        validate_hive(h, lam[:3], mu, nu)


def test_boundary_mismatch():
    with pytest.raises(InvariantError):
        hive_from_boundary([1, -1], [1, -1], [3, -1])


@pytest.mark.parametrize("seed", range(5))
def test_sampled_hives_validate(seed):
    h, (lam, mu, nu) = sampled_hive(seed)
    assert validate_hive(h, lam, mu, nu, tol=1e-7).ok


def test_json_round_trip():
    h, _ = sampled_hive(7)
    h2 = DiscreteHive.from_json(json.dumps(h.to_json()))
    assert h2 == h
    n = h.n
    tri = [h.values[x, y] for x in range(n + 1) for y in range(x, n + 1)]
    assert DiscreteHive.from_json({"n": n, "values": tri}) == h
    with pytest.raises(DomainError):
        DiscreteHive.from_json({"n": n, "values": tri[:-1]})


def test_hive_is_read_only():
    h = lift(ContinuumHive.quadratic(1.0), 3)
    with pytest.raises(ValueError):
        h.values[1, 1] = 0.0
    with pytest.raises(DomainError):
        h[(3, 1)]


def test_example_augmented_hive():
    a = example_augmented_hive()
    ok, problems = a.validate()
    assert ok, problems
    lam, mu, nu = boundary_of(a.hive())
    for s in (lam, mu, nu):
        assert np.allclose(s, [15, 5, -5, -15])
    g = extract_gt(a)
    assert np.allclose(g.top, nu)
    assert len(a.lower_rhombus_deltas()) == 12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), jitter=st.floats(0, 2))
def test_gt_interlacing_iff_lower_rhombi(seed, jitter):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    h = lift(ContinuumHive.quadratic(3.0), n)
    top = boundary_of(h)[2]
    rows = [r + jitter * rng.normal(size=r.size) for r in GTPattern.midpoint(top).rows[:-1]]
    gt = GTPattern(rows + [top], check=False)
    a = AugmentedHive.from_parts(h, gt)
    inter = not gt.interlacing_violations(1e-9)
    rh = all(d <= 1e-9 * max(1.0, np.max(np.abs(a.values))) for _, d in a.lower_rhombus_deltas())
    assert inter == rh
    assert all(np.allclose(r1, r2) for r1, r2 in zip(a.gt_differences(), gt.rows))


def test_gt_pattern_checks():
    with pytest.raises(InvariantError):
        GTPattern([[5.0], [1.0, 0.0]])
    with pytest.raises(InvariantError):
        GTPattern([[1.0, 2.0]])
    assert GTPattern.midpoint([3, 1, -4]).to_json() == [[0.25], [2.0, -1.5], [3.0, 1.0, -4.0]]


def test_kernel_normalization_and_peak():
    u, w = kernel_rule(32)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert theta_unit(0.5, 0.5) == pytest.approx(396900 / 65536, rel=1e-14)
    assert theta(0.05, 0.05, 0.1) == pytest.approx(100 * 396900 / 65536)
    assert theta_unit(1.2, 0.5) == 0.0
    # fourth-order tangency at the edge
    for h in (1e-2, 1e-3):
        assert theta_unit(h, 0.5) < 10 * theta_unit(0.5, 0.5) * (4 * h) ** 4
    with pytest.raises(DomainError):
        theta(0.1, 0.1, 0.0)


@pytest.mark.parametrize("c,eps", [(1.0, 0.05), (2.5, 0.01)])
def test_mollified_quadratic_hessian(c, eps):
    m = mollify(ContinuumHive.quadratic(c), eps)
    expect = c * (1 - 4 * eps) ** 2 + eps
    assert m.hessian == pytest.approx(expect)
    masses, _ = lattice.cell_masses(lift(m, 16).values, 1)
    assert np.allclose(masses, -expect, rtol=1e-9)
    # corners vanish
    assert np.allclose(m(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 1.0])), 0, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_mollified_sample_is_strongly_concave(seed):
    h, _ = sampled_hive(seed, n=5)
    eps = 0.04
    m = mollify(ContinuumHive.from_discrete(h), eps)
    lf = lift(m, 24)
    for kind in lattice.KINDS:
        assert np.max(lf.deltas(kind)) <= -eps * (1 - 1e-9)


def test_mollify_domain():
    with pytest.raises(DomainError):
        mollify(ContinuumHive.quadratic(1.0), 0.1)


def test_pl_extension_reproduces_lattice():
    h, _ = sampled_hive(3)
    F = ContinuumHive.from_discrete(h)
    n = h.n
    again = lift(F, n)
    assert np.allclose(again.values, h.values, equal_nan=True)
    assert math.isclose(float(F(0.0, 1.0)), h.values[0, n] / n ** 2)
