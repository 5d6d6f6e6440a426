import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hivelab.errors import DomainError, InvariantError
from hivelab.spectra import (BoundaryProfile, SeminormMode, SpectrumVec, ball_constraints_I,
                             discretize, seminorm_I, seminorm_I_batch, tau)

MODES = list(SeminormMode)
vec = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=12)


def zero_sum(v):
    v = np.asarray(v, dtype=float)
    return v - v.mean()


def test_spectrum_validation():
    s = SpectrumVec([3, 1, -4])
    assert s.n == 3 and np.array_equal(s.values, [3, 1, -4])
    with pytest.raises((InvariantError, DomainError)):
        SpectrumVec([1, 2, 3])
    with pytest.raises(ValueError):
        s.values[0] = 9.0
    c, shift = SpectrumVec.centered([0, 5, 1])
    assert abs(c.values.sum()) < 1e-12 and shift == pytest.approx(2.0)
    assert np.allclose(c.values, [3, -1, -2])


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_tau(n):
    t = tau(n).values
    assert t.size == n and abs(t.sum()) < 1e-12
    assert np.allclose(np.diff(t), -1)


def test_discretize_quadratic():
    lam = discretize(BoundaryProfile.quadratic(1.0), 4).values
    assert np.allclose(lam, [3, 1, -1, -3])


def test_discretize_rejects_convex():
    with pytest.raises(InvariantError):
        discretize(BoundaryProfile.pwl([0, -1, 0]), 4)


@settings(max_examples=60, deadline=None)
@given(v=vec, w=vec, t=st.floats(0, 10))
def test_seminorm_is_a_seminorm(v, w, t):
    k = min(len(v), len(w))
    v, w = zero_sum(v[:k]), zero_sum(w[:k])
    for mode in MODES:
        a, b = seminorm_I(v, mode), seminorm_I(w, mode)
        assert a >= 0
        assert seminorm_I(t * v, mode) == pytest.approx(t * a, abs=1e-9 * (1 + t * a))
        assert seminorm_I(v + w, mode) <= a + b + 1e-9 * (1 + a + b)


def test_seminorm_zero_and_batch():
    rng = np.random.default_rng(1)
    V = rng.normal(size=(50, 5))
    V -= V.mean(axis=1, keepdims=True)
    for mode in MODES:
        assert seminorm_I(np.zeros(4), mode) == 0
        b = seminorm_I_batch(V, mode)
        assert np.allclose(b, [seminorm_I(v, mode) for v in V])


def test_modes_differ_in_general():
    v = zero_sum([3, -5, 4, -2])
    assert seminorm_I(v, "sorted_prefix") != seminorm_I(v, "antiderivative_sup")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), r=st.floats(0.1, 5))
def test_ball_constraints_match_seminorm(seed, r):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    c = zero_sum(rng.normal(size=n))
    A, b = ball_constraints_I(c, r)
    assert A.shape == (2 * (n - 1), n)
    for _ in range(20):
        x = c + zero_sum(rng.normal(scale=r, size=n))
        inside = np.all(A @ x <= b + 1e-12)
        d = seminorm_I(x - c, SeminormMode.ANTIDERIVATIVE_SUP)
        if abs(d - r) > 1e-9:
            assert inside == (d <= r)


def test_ball_radius_must_be_positive():
    with pytest.raises(DomainError):
        ball_constraints_I([1, -1], 0.0)


def test_profile_json_and_validate():
    q = BoundaryProfile.quadratic(2.0)
    q2 = BoundaryProfile.from_json(json.dumps(q.to_json()))
    t = np.linspace(0, 1, 11)
    assert np.allclose(q(t), q2(t))
    assert q.validate() == pytest.approx(2.0, rel=1e-3)
    p = BoundaryProfile.pwl([0, 1, 1.5, 0])
    assert np.allclose(BoundaryProfile.from_json(p.to_json()).knots, p.knots)
    with pytest.raises(InvariantError):
        BoundaryProfile.pwl([0, 1, 3, 0]).validate()
    with pytest.raises(InvariantError):
        BoundaryProfile.pwl([0, 1, 1]).validate()
    assert np.allclose((3 * q)(t), 3 * q(t))
