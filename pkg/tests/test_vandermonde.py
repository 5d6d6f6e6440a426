import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hivelab.spectra import BoundaryProfile, discretize, tau
from hivelab.vandermonde import (continuum_logV, gt_volume, log_ratio_to_tau, log_vandermonde,
                                 log_vandermonde_tau, tau_lower_bound, vupper_bound)


def test_small_cases():
    assert log_vandermonde([3, 1, -4]) == pytest.approx(math.log(2 * 7 * 5))
    assert gt_volume([2, 0, -2]) == pytest.approx(math.log(8))
    assert gt_volume([5, -1]) == pytest.approx(math.log(6))
    assert log_ratio_to_tau(tau(6).values) == pytest.approx(0.0, abs=1e-12)


def test_degenerate():
    v = log_vandermonde([1, 1, -2])
    assert v == -math.inf and v.degenerate


@pytest.mark.parametrize("n", [1, 2, 5, 40])
def test_tau_formula(n):
    direct = float(log_vandermonde(tau(n).values)) if n > 1 else 0.0
    assert log_vandermonde_tau(n) == pytest.approx(direct, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), t=st.floats(0.1, 10), shift=st.floats(-5, 5))
def test_scaling_and_translation(seed, t, shift):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    v = np.sort(rng.normal(size=n))[::-1] + 1e-6 * np.arange(n)[::-1]
    base = float(log_vandermonde(v))
    assert float(log_vandermonde(t * v)) == pytest.approx(base + n * (n - 1) / 2 * math.log(t),
                                                          abs=1e-8)
    assert float(log_vandermonde(v + shift)) == pytest.approx(base, abs=1e-8)
    assert float(gt_volume(v)) == pytest.approx(float(log_ratio_to_tau(v)))


def test_discrete_quadratic_identity():
    prof = BoundaryProfile.quadratic(1.0)
    for n in (2, 3, 17, 64):
        lam = discretize(prof, n).values
        assert 2 / n ** 2 * log_ratio_to_tau(lam) == pytest.approx((n - 1) / n * math.log(2),
                                                                    rel=1e-12)


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_continuum_quadratic(c):
    assert float(continuum_logV(BoundaryProfile.quadratic(c))) == pytest.approx(math.log(2 * c),
                                                                               abs=1e-6)


def test_continuum_semicircle_like_profile():
    # lam(x) = cos(pi x): compare against a brute-force midpoint sum
    f = lambda x: np.cos(np.pi * np.asarray(x))
    got = float(continuum_logV(f))
    m = 3000
    x = (np.arange(m) + 0.5) / m
    X, Y = np.meshgrid(x, x, indexing="ij")
    mask = X < Y
    g = np.log(np.abs(f(X[mask]) - f(Y[mask])) / np.abs(X[mask] - Y[mask]))
    ref = 2 * g.sum() / m ** 2
    assert got == pytest.approx(ref, abs=5e-3)


def test_continuum_flat_diverges():
    v = continuum_logV(BoundaryProfile.pwl([0.0, 1.0, 1.0, 0.0]))
    assert v == -math.inf and v.diverged


def test_bounds_on_tau_and_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        nu = np.sort(rng.exponential(size=n))[::-1] + 1e-9 * np.arange(n)[::-1]
        assert log_ratio_to_tau(nu) <= vupper_bound(nu) + 1e-9
    for n in range(1, 100):
        assert log_vandermonde_tau(n) >= tau_lower_bound(n)
