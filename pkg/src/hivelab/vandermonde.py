"""Log-domain Vandermonde products and their continuum limit."""
from __future__ import annotations

import numpy as np

from .errors import DomainError


class LogValue(float):
    """A float carrying ``degenerate`` / ``diverged`` flags.

    ``-inf`` is used as the sentinel for zero products and divergent
    integrals; the flag says which.
    """

    def __new__(cls, value, degenerate=False, diverged=False, info=None):
        obj = super().__new__(cls, value)
        obj.degenerate = bool(degenerate)
        obj.diverged = bool(diverged)
        obj.info = info or {}
        return obj


def _pair_diffs(v):
    v = np.asarray(v, dtype=float).ravel()
    i, j = np.triu_indices(v.size, k=1)
    return v[i] - v[j], (j - i).astype(float)


def log_vandermonde(v) -> LogValue:
    """``sum_{i<j} log(v_i - v_j)`` for strictly decreasing ``v``."""
    d, _ = _pair_diffs(v)
    if d.size == 0:
        return LogValue(0.0)
    if np.any(d <= 0):
        if np.any(d < 0):
            raise DomainError("entries must be nonincreasing")
        return LogValue(-np.inf, degenerate=True)
    return LogValue(float(np.sum(np.log(d))))


def log_ratio_to_tau(v) -> LogValue:
    """``sum_{i<j} log((v_i - v_j) / (j - i))``, i.e. ``log V(v) - log V(tau)``."""
    d, gap = _pair_diffs(v)
    if d.size == 0:
        return LogValue(0.0)
    if np.any(d <= 0):
        if np.any(d < 0):
            raise DomainError("entries must be nonincreasing")
        return LogValue(-np.inf, degenerate=True)
    return LogValue(float(np.sum(np.log(d / gap))))


def gt_volume(nu) -> LogValue:
    """Log-volume of the GT polytope with top row ``nu``.

    The volume is taken in the coordinates of the free pattern entries.
    """
    return log_ratio_to_tau(nu)


def log_vandermonde_tau(n: int) -> float:
    """``log V(tau_n) = sum_{k=1}^{n-1} log k!``."""
    from scipy.special import gammaln
    k = np.arange(1, n)
    return float(np.sum(gammaln(k + 1)))


# ----------------------------------------------------------- continuum limit

_DELTAS = tuple(2.0 ** -k for k in range(6, 13))


def _slope_fn(lam):
    if hasattr(lam, "derivative"):
        return lam.derivative
    if callable(lam):
        return lam
    raise DomainError("lam must be callable or a BoundaryProfile")


def _strip_integral(lam, u_lo, u_hi, panels, order_u=16, order_x=48):
    """``int_{u_lo}^{u_hi} du int_0^{1-u} log(|lam(x) - lam(x+u)| / u) dx``."""
    tu, wu = np.polynomial.legendre.leggauss(order_u)
    tx, wx = np.polynomial.legendre.leggauss(order_x)
    edges = np.geomspace(u_lo, u_hi, panels + 1) if u_lo > 0 else np.linspace(u_lo, u_hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    u = (0.5 * (b - a) * tu[None, :] + 0.5 * (a + b)).ravel()
    wu_all = (0.5 * (b - a) * wu[None, :]).ravel()
    L = 1.0 - u
    x = 0.5 * L[:, None] * (tx[None, :] + 1.0)
    wxx = 0.5 * L[:, None] * wx[None, :]
    diff = np.abs(lam(x) - lam(x + u[:, None]))
    if np.any(~(diff > 1e-300)):
        return -np.inf
    g = np.log(diff) - np.log(u)[:, None]
    return float(np.sum(wu_all * np.sum(wxx * g, axis=1)))


def continuum_logV(lam, deltas=_DELTAS) -> LogValue:
    """``2 * int_T log(|lam(x) - lam(y)| / |x - y|)`` over ``T = {x <= y}``.

    Parameters
    ----------
    lam : callable or BoundaryProfile
        A nonincreasing function on [0, 1]; for a profile its left
        derivative is used.
    deltas : sequence of float
        Decreasing band widths; the strip ``|x - y| < delta`` is excluded and
        the results are Richardson-extrapolated to ``delta = 0``.

    Returns
    -------
    LogValue
        ``-inf`` with ``diverged=True`` if the integrand hits ``log 0``.
    """
    f = _slope_fn(lam)

    def lamv(t):
        return np.asarray(f(np.asarray(t, dtype=float)), dtype=float)

    deltas = sorted(deltas, reverse=True)
    outer = _strip_integral(lamv, deltas[0], 1.0, panels=24)
    if not np.isfinite(outer):
        return LogValue(-np.inf, diverged=True)
    vals = []
    acc = outer
    prev = deltas[0]
    for d in deltas[1:]:
        piece = _strip_integral(lamv, d, prev, panels=2)
        if not np.isfinite(piece):
            return LogValue(-np.inf, diverged=True)
        acc += piece
        vals.append(acc)
        prev = d
    vals = [outer] + vals
    # Romberg table in delta with ratio 2
    table = [np.array(vals)]
    for k in range(1, min(4, len(vals))):
        t = table[-1]
        table.append((2 ** k * t[1:] - t[:-1]) / (2 ** k - 1))
    est = table[-1][-1]
    spread = float(abs(table[-1][-1] - table[-2][-1]))
    # slowly decaying band contributions mean a log-divergent integrand
    steps = np.abs(np.diff(vals))
    if len(steps) > 2 and steps[-1] > 0.9 * steps[-2] and steps[-1] > 1e-3:
        return LogValue(-np.inf, diverged=True, info={"band_steps": steps.tolist()})
    return LogValue(2.0 * est, info={"richardson_spread": 2 * spread,
                                     "band_values": [2 * v for v in vals]})


def vupper_bound(nu) -> float:
    """Right side of ``log_ratio_to_tau(nu) <= C(n,2) log(nu_1 - nu_n) - sum_k k log(k floor((n-1)/k))``."""
    nu = np.asarray(nu, dtype=float).ravel()
    n = nu.size
    k = np.arange(1, n)
    return float(n * (n - 1) / 2 * np.log(nu[0] - nu[-1]) - np.sum(k * np.log(k * ((n - 1) // k))))


def tau_lower_bound(n: int) -> float:
    """``C(n,2) log n - (3/4) n^2``."""
    return float(n * (n - 1) / 2 * np.log(n) - 0.75 * n * n)
