import numpy as np
import pytest
from scipy import stats

from hivelab.errors import DomainError
from hivelab.polytope import build_hive_polytope, is_feasible
from hivelab.rmt import (haar_unitary, hermitian_eigvals, horn_probability, ks_distance,
                         predicted_probability, sample_sum_spectra, spectrum_of_sum,
                         top_eigenvalue_histogram)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_haar_first_entry_is_beta(n):
    U = haar_unitary(n, np.random.default_rng(n), size=20_000)
    assert np.allclose(U @ np.conj(np.swapaxes(U, -1, -2)), np.eye(n), atol=1e-12)
    x = np.abs(U[:, 0, 0]) ** 2
    res = stats.kstest(x, stats.beta(1, n - 1).cdf)
    assert res.pvalue > 1e-3
    assert ks_distance(x, stats.beta(1, n - 1).cdf) == pytest.approx(res.statistic)


def test_eigvals_match_lapack():
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(10, 4, 4)) + 1j * rng.normal(size=(10, 4, 4))
    H = Z + np.conj(np.swapaxes(Z, -1, -2))
    ref = np.linalg.eigvalsh(H)[..., ::-1]
    assert np.allclose(hermitian_eigvals(H), ref, atol=1e-10)


def test_sum_basic_properties():
    lam = np.array([3.0, 1.0, -4.0])
    mu = np.array([2.0, 0.0, -2.0])
    spec = sample_sum_spectra(lam, mu, 2000, seed=1)
    assert np.allclose(spec.sum(axis=1), 0, atol=1e-10)
    assert np.all(np.diff(spec, axis=1) <= 1e-12)
    # Weyl bounds on the extreme eigenvalues
    assert np.all(spec[:, 0] <= lam[0] + mu[0] + 1e-9)
    assert np.all(spec[:, 0] >= max(lam[0] + mu[-1], lam[-1] + mu[0]) - 1e-9)
    assert np.allclose(sample_sum_spectra(lam, np.zeros(3), 50, seed=2), lam)
    one = spectrum_of_sum([2.0], [-0.5], rng_seed=3)
    assert one == pytest.approx([1.5])


def test_sampled_spectra_are_horn_feasible():
    lam = np.array([4.0, 1.0, -1.0, -4.0])
    mu = np.array([2.0, 1.0, -1.5, -1.5])
    for nu in sample_sum_spectra(lam, mu, 20, seed=5):
        assert is_feasible(build_hive_polytope(lam, mu, nu), tol=1e-7)


def test_determinism_and_common_unitary():
    lam = [3.0, 1.0, -4.0]
    mu = [2.0, 0.0, -2.0]
    a = sample_sum_spectra(lam, mu, 300, seed=9)
    b = sample_sum_spectra(lam, mu, 300, seed=9)
    assert np.array_equal(a, b)
    W = haar_unitary(3, np.random.default_rng(1))
    c = sample_sum_spectra(lam, mu, 300, seed=9, common=W)
    assert np.allclose(a, c, atol=1e-10)


def test_horn_probability_limits():
    lam = [3.0, 1.0, -4.0]
    mu = [2.0, 0.0, -2.0]
    nu = [4.0, 1.0, -5.0]
    assert horn_probability(lam, mu, nu, 1e6, trials=1000).value == 1.0
    assert horn_probability(lam, mu, nu, 0.0, trials=1000).value == 0.0
    with pytest.raises(DomainError):
        horn_probability(lam, mu, nu, 1.0, trials=10)
    # shifted inputs are centred and the shifts reported
    est = horn_probability([4.0, 2.0, -3.0], mu, nu, 2.0, trials=1000)
    assert est.info["shifts"][0] == pytest.approx(1.0)


def test_prediction_covers_everything_for_large_ball():
    lam = [1.0, -1.0]
    mu = [0.5, -0.5]
    est = predicted_probability(lam, mu, [0.0, 0.0], 100.0, method="quadrature")
    assert est.value == pytest.approx(1.0, rel=1e-8)
    assert predicted_probability(lam, mu, [0.0, 0.0], 0.0).value == 0.0
    with pytest.raises(DomainError):
        predicted_probability([1, 0, -1], [1, 0, -1], [2, 0, -2], 1.0, method="quadrature")


def test_prediction_n2_routes_agree():
    lam = [1.0, -1.0]
    mu = [0.5, -0.5]
    nu = [1.0, -1.0]
    q = predicted_probability(lam, mu, nu, 0.3, method="quadrature")
    v = predicted_probability(lam, mu, nu, 0.3, method="volume", budget=400_000, seed=2)
    assert abs(q.value - v.value) < 3 * v.stderr + 1e-3
    mc = horn_probability(lam, mu, nu, 0.3, trials=100_000, seed=4)
    assert abs(mc.value - q.value) < 4 * mc.stderr


def test_histogram():
    spec = sample_sum_spectra([1.0, -1.0], [1.0, -1.0], 1000, seed=0)
    edges, counts = top_eigenvalue_histogram(spec, bins=10)
    assert counts.sum() == 1000 and edges.size == 11
    assert edges[0] >= -1e-9 and edges[-1] <= 2 + 1e-9
