import json
import math

import numpy as np
import pytest

from hivelab import functional as fn
from hivelab.errors import DomainError
from hivelab.hive import ContinuumHive, DiscreteHive, hive_from_boundary, lift, mollify
from hivelab.polytope import bounding_box, build_hive_polytope, hit_and_run
from hivelab.rmt import sample_sum_spectra
from hivelab.spectra import BoundaryProfile, discretize
from hivelab.surface_tension import default_axis, sigma_table_build


def geo(s):
    return -np.mean(np.log(s), axis=-1)


SIG = fn.SigmaSource(geo, "geo")


def random_hive(seed, n=4):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.normal(scale=3, size=n))[::-1]
    mu = np.sort(rng.normal(scale=3, size=n))[::-1]
    lam -= lam.mean()
    mu -= mu.mean()
    nu = sample_sum_spectra(lam, mu, 1, seed=seed)[0]
    x, _ = hit_and_run(build_hive_polytope(lam, mu, nu), steps=1, seed=seed, burn=100)
    return DiscreteHive(hive_from_boundary(lam, mu, nu, x[0]))


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_quadratic_closed_form(c):
    h = ContinuumHive.quadratic(c)
    expect = math.log(2 * c) - 0.5 * geo(np.array([c, c, c]))
    for a in range(4):
        assert fn.J_a(h, a, SIG) == pytest.approx(expect, abs=1e-9)
    rep = fn.J_limit(h, 3, SIG)
    assert rep.converged and rep.value == pytest.approx(expect, abs=1e-9)
    json.dumps(rep.to_json())


def test_discrete_hive_uses_discrete_V():
    h = lift(ContinuumHive.quadratic(1.0), 8)
    val, det = fn.J_a(h, 1, SIG, detail=True)
    assert det["log_V"] == pytest.approx(7 / 8 * math.log(2), rel=1e-12)
    assert val == pytest.approx(det["log_V"] - 0.5 * geo(np.ones(3)))


def test_sequence_is_monotone_for_convex_sigma():
    for seed in range(3):
        h = random_hive(seed)
        rep = fn.J_limit(mollify(ContinuumHive.from_discrete(h), 0.05), 4, SIG, rtol=1.0)
        vals = list(rep.sequence.values())
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_no_jensen_violations_for_convex_sigma():
    h = mollify(ContinuumHive.from_discrete(random_hive(11)), 0.05)
    viol, pairs = fn.jensen_violations(h, 3, SIG)
    assert not viol and pairs == 1 + 3 + 10


def test_jensen_detects_concave_sigma():
    h = mollify(ContinuumHive.from_discrete(random_hive(11)), 0.05)
    concave = fn.SigmaSource(lambda s: np.mean(np.log(s), axis=-1), "concave")
    viol, _ = fn.jensen_violations(h, 3, concave)
    assert viol


def test_floor_gives_minus_inf():
    h = lift(ContinuumHive.quadratic(1.0), 4)
    assert np.isfinite(fn.J_a(h, 1, SIG))
    # an affine field has zero mass in every cell
    flat = DiscreteHive(0 * h.values)
    val, det = fn.J_a(flat, 0, SIG, detail=True)
    assert val == -math.inf and det["floor_cell"] is not None


def test_filled_masses_for_small_n():
    h = lift(ContinuumHive.quadratic(1.0), 4)
    s, filled = fn.filled_masses(h.values, 1)
    assert filled > 0 and np.allclose(s, 1.0)
    with pytest.raises(DomainError):
        fn.level_masses(h.values, 2, base_level=1)


def test_as_sigma_variants(tmp_path, monkeypatch):
    table = sigma_table_build(default_axis(), estimator=lambda s: (float(geo(s)), 0.0))
    src = fn.as_sigma(table)
    assert src.table is table and src.version.startswith("table:")
    p = tmp_path / "t.json"
    table.save(p)
    monkeypatch.setenv(fn.SIGMA_ENV, str(p))
    assert fn.as_sigma(None).table.version == table.version
    assert fn.as_sigma(geo).version == "custom"
    with pytest.raises(DomainError):
        fn.as_sigma(42)


def test_dykstra_matches_box_clip():
    A = np.vstack([np.eye(3), -np.eye(3)])
    b = np.ones(6)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(scale=3, size=3)
        assert np.allclose(fn.dykstra_project(x, A, b), np.clip(x, -1, 1), atol=1e-7)


def test_minimizer_n3_matches_golden_section():
    lam = discretize(BoundaryProfile.quadratic(1.0), 3).values
    res = fn.minimize_sigma_integral(lam, lam, lam, a=1, sigma=SIG)
    sys = build_hive_polytope(lam, lam, lam)
    (lo,), (hi,) = bounding_box(sys.A, sys.b)
    obj = fn.SigmaObjective(lam, lam, lam, 1, SIG)
    xs, fs = fn.golden_section(lambda t: obj(np.array([t])), lo, hi)
    assert res.objective == pytest.approx(fs, abs=1e-8)


def test_minimizer_beats_random_feasible_points():
    lam = discretize(BoundaryProfile.quadratic(1.0), 4).values
    mu = discretize(BoundaryProfile.quadratic(0.5), 4).values
    nu = discretize(BoundaryProfile.quadratic(0.9), 4).values
    res = fn.minimize_sigma_integral(lam, mu, nu, a=1, sigma=SIG)
    obj = fn.SigmaObjective(lam, mu, nu, 1, SIG)
    xs, _ = hit_and_run(build_hive_polytope(lam, mu, nu), steps=200, seed=3)
    assert all(res.objective <= obj(x) + 1e-9 for x in xs)
    assert res.hive.n == 4
    json.dumps(res.to_json())


def test_rate_infeasible_is_inf():
    q = BoundaryProfile.quadratic
    val, res = fn.rate_I(q(5.0), q(1.0), q(1.0), 3, sigma=SIG)
    assert val == math.inf and res is None
