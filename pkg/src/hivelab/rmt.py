"""Haar-conjugated Hermitian matrices, spectra of sums and the Horn probability."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import linprog

from .errors import DomainError, NumericError
from .polytope import build_augmented_polytope, estimate_volume
from .spectra import SeminormMode, _mode, seminorm_I_batch
from .vandermonde import gt_volume, log_vandermonde, log_vandermonde_tau

CHUNK = 50_000  # trials per independent stream; fixed so results do not depend on threads


def haar_unitary(n: int, rng, size=None):
    """Haar-distributed unitary matrices (batched when ``size`` is given).

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved
    into ``Q`` so that the factorization is unique.
    """
    shape = (n, n) if size is None else (size, n, n)
    Z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return Q * ph[..., None, :]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_conjugate(lam, rng_seed=0):
    """``U diag(lam) U*`` with ``U`` Haar."""
    lam = np.asarray(lam, dtype=float).ravel()
    U = haar_unitary(lam.size, _rng(rng_seed))
    return (U * lam[None, :]) @ U.conj().T


def hermitian_eigvals(H, tol: float = 1e-8):
    """Eigenvalues of Hermitian ``H`` (batched), sorted decreasing.

    Uses the real symmetric embedding ``[[Re, -Im], [Im, Re]]``, whose
    spectrum is that of ``H`` with every eigenvalue doubled.
    """
    H = np.asarray(H)
    re, im = H.real, H.imag
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    M = np.concatenate([top, bot], axis=-2)
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    w = np.linalg.eigvalsh(M)
    a, b = w[..., 0::2], w[..., 1::2]
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    gap = float(np.max(np.abs(a - b), initial=0.0))
    if gap > tol * scale:
        raise NumericError(f"embedded spectrum is not paired (gap {gap:.3g})")
    return (0.5 * (a + b))[..., ::-1]


def spectrum_of_sum(lam, mu, rng_seed=0):
    """Spectrum of ``X + Y`` for independent Haar conjugates of ``diag(lam), diag(mu)``."""
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    if lam.size != mu.size:
        raise DomainError("lam and mu must have equal length")
    rng = _rng(rng_seed)
    X = haar_conjugate(lam, rng)
    Y = haar_conjugate(mu, rng)
    return hermitian_eigvals(X + Y)


def sample_sum_spectra(lam, mu, trials: int, seed=0, common=None):
    """Batched spectra of ``X + Y``, shape ``(trials, n)``.

    Trials are split into fixed chunks, each with its own spawned stream.
    ``common`` is an optional fixed unitary applied to both summands.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    n = lam.size
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    nchunk = -(-trials // CHUNK)
    out = np.empty((trials, n))
    for c, child in enumerate(ss.spawn(nchunk)):
        rng = np.random.default_rng(child)
        m = min(CHUNK, trials - c * CHUNK)
        U = haar_unitary(n, rng, m)
        V = haar_unitary(n, rng, m)
        Z = (U * lam) @ np.conj(np.swapaxes(U, -1, -2)) + (V * mu) @ np.conj(np.swapaxes(V, -1, -2))
        if common is not None:
            Z = common @ Z @ common.conj().T
        out[c * CHUNK: c * CHUNK + m] = hermitian_eigvals(Z)
    return out


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    info: dict = field(default_factory=dict, compare=False)

    def to_json(self):
        return {"value": self.value, "stderr": self.stderr, **self.info}


def _center(v):
    v = np.asarray(v, dtype=float).ravel()
    shift = float(v.mean())
    return v - shift, shift


def horn_probability(lam, mu, nu, eps, trials: int = 100_000, mode=SeminormMode.ANTIDERIVATIVE_SUP,
                     seed=0) -> Estimate:
    """Monte Carlo frequency of ``||spec(X+Y) - nu||_I < eps``.

    Non-centred inputs are shifted to zero trace; the shifts are reported.
    """
    if trials < 1000:
        raise DomainError("need at least 1000 trials")
    lam, s1 = _center(lam)
    mu, s2 = _center(mu)
    nu, s3 = _center(nu)
    mode = _mode(mode)
    spec = sample_sum_spectra(lam, mu, trials, seed)
    dist = seminorm_I_batch(spec - nu[None, :], mode)
    hits = int(np.count_nonzero(dist < eps))
    p = hits / trials
    se = math.sqrt(max(p * (1 - p), 0.0) / trials)
    return Estimate(p, se, {"trials": trials, "hits": hits, "mode": mode.value,
                            "shifts": [s1, s2, s3]})


def log_prefactor(lam, mu) -> float:
    """``log(V(tau)^2 / (V(lam) V(mu)))``."""
    n = len(lam)
    return 2 * log_vandermonde_tau(n) - log_vandermonde(lam) - log_vandermonde(mu)


def _n2_quadrature(lam, mu, nu, eps):
    """Direct 1-D integral over the top diagonal value for ``n = 2``."""
    # feasible range of nu'_1: project the augmented polytope on its diagonal
    sys = build_augmented_polytope(lam, mu)
    red = sys.reduced
    j = sys.index((1, 1))
    lo_h = hi_h = None
    for sign in (1.0, -1.0):
        c = np.zeros(sys.d)
        c[j] = sign
        res = linprog(c @ red.basis, A_ub=red.A, b_ub=red.b,
                      bounds=[(None, None)] * red.k, method="highs")
        if res.status != 0:
            raise NumericError(f"Horn interval LP failed: {res.message}")
        val = sign * res.fun + red.origin[j]
        if sign > 0:
            lo_h = val
        else:
            hi_h = val
    lo = max(lo_h, nu[0] - eps)
    hi = min(hi_h, nu[0] + eps)
    if hi <= lo:
        return 0.0

    def integrand(c):
        # |H_2(lam, mu; nu')| is 1 (a single point) on the Horn interval
        return math.exp(gt_volume([c, -c]))

    val, _ = integrate.quad(integrand, lo, hi)
    return val


def predicted_probability(lam, mu, nu, eps, budget: int | None = None, seed=0,
                          method: str = "auto") -> Estimate:
    """Probability of the seminorm ball around ``nu`` from the hive-volume density.

    ``(V(tau)^2 / (V(lam) V(mu))) * |G|`` where ``G`` is the augmented
    polytope with its diagonal confined to the ball; its volume integrates
    ``V(nu') / V(tau) * |H(lam, mu; nu')|`` over the ball.

    Parameters
    ----------
    method : {"auto", "quadrature", "volume"}
        ``quadrature`` is available for ``n = 2`` only.
    """
    lam, _ = _center(lam)
    mu, _ = _center(mu)
    nu, _ = _center(nu)
    n = lam.size
    if n > 4:
        raise DomainError("prediction is limited to n <= 4")
    if not eps > 0:
        return Estimate(0.0, 0.0, {"method": "empty_ball"})
    lam_s = np.sort(lam)[::-1]
    mu_s = np.sort(mu)[::-1]
    logpre = log_prefactor(lam_s, mu_s)
    if n == 1:
        return Estimate(1.0 if abs(nu[0] - lam[0] - mu[0]) < eps else 0.0, 0.0)
    if method == "auto":
        method = "quadrature" if n == 2 else "volume"
    if method == "quadrature":
        if n != 2:
            raise DomainError("quadrature path exists for n = 2 only")
        g = _n2_quadrature(lam_s, mu_s, nu, eps)
        return Estimate(math.exp(logpre) * g, 0.0, {"method": "quadrature", "G": g})
    sys = build_augmented_polytope(lam_s, mu_s, nu, eps)
    est = estimate_volume(sys, "annealed" if sys.dimension > 4 else "auto",
                          budget=budget, seed=seed)
    if est.log_volume == -np.inf:
        return Estimate(0.0, 0.0, {"method": "volume", "flags": list(est.flags)})
    val = math.exp(logpre + est.log_volume)
    return Estimate(val, val * est.stderr, {"method": "volume", "log_G": est.log_volume,
                                            "log_prefactor": logpre,
                                            "volume_method": est.method})


def top_eigenvalue_histogram(spec, bins=50):
    """``(edges, counts)`` of the largest eigenvalue."""
    counts, edges = np.histogram(np.asarray(spec)[:, 0], bins=bins)
    return edges, counts


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    F = cdf(x)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - F), np.max(F - (i - 1) / m)))
