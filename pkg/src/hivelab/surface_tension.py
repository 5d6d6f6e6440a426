"""Surface tension from torus polytope volumes.

``f_n(s) = |P_n(s)|**(1/(n**2-1))`` where ``P_n(s)`` is the sum-zero torus
polytope, and ``sigma(s) = -ln f(s)`` with ``f`` approximated at small ``n``.
Both ``f_n`` and ``sigma`` are positively homogeneous:
``f_n(t s) = t f_n(s)`` and ``sigma(t s) = sigma(s) - ln t``.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, NumericError
from .polytope import build_torus_polytope, estimate_volume

log = logging.getLogger(__name__)

CONJECTURE_NOTE = "sigma(s0, s1, s2) ~ -ln(e (s0 + s1) / pi * sin(pi s0 / (s0 + s1)))"


@dataclass(frozen=True)
class FEstimate:
    value: float
    stderr: float
    n: int
    log_volume: float
    log_volume_stderr: float
    method: str

    def to_json(self):
        return dict(self.__dict__)


def _seed_for(seed, *key):
    """Deterministic child seed from a base seed and a hashable key."""
    h = hashlib.sha256(repr((seed,) + key).encode()).digest()
    return int.from_bytes(h[:8], "little")


def f_n(s, n: int, budget: int | None = None, seed=0, method: str = "annealed") -> FEstimate:
    """``|P_n(s)|**(1/(n^2-1))`` with a delta-method standard error."""
    s = np.asarray(s, dtype=float).ravel()
    if s.size != 3 or np.any(s <= 0):
        raise DomainError("s must be three positive numbers")
    if not 2 <= n <= 5:
        raise DomainError("n must lie in 2..5")
    sys = build_torus_polytope(n, s, "sum_zero")
    if method == "annealed" and sys.dimension <= 4:
        method = "auto"
    est = estimate_volume(sys, method, budget=budget, seed=seed)
    if not np.isfinite(est.log_volume):
        raise NumericError(f"torus volume estimate failed: {est.flags}")
    d = n * n - 1
    val = math.exp(est.log_volume / d)
    return FEstimate(val, val * est.stderr / d, n, est.log_volume, est.stderr, est.method)


@dataclass(frozen=True)
class SigmaEstimate:
    value: float
    stderr: float
    f: float
    f_stderr: float
    per_n: tuple
    largest_n_value: float

    def to_json(self):
        return {"sigma": self.value, "stderr": self.stderr, "f": self.f,
                "f_stderr": self.f_stderr, "sigma_largest_n": self.largest_n_value,
                "per_n": [e.to_json() for e in self.per_n]}


def sigma_estimate(s, n_list=(2, 3, 4), budget: int | None = None, seed=0) -> SigmaEstimate:
    """``-ln`` of the inverse-variance mean of ``f_n`` over ``n_list``.

    The sample spread of the ``f_n`` across ``n`` is added to the variance
    as a surrogate for the unknown distance to the limit.
    """
    n_list = tuple(int(n) for n in n_list)
    if not n_list or any(n not in (2, 3, 4, 5) for n in n_list):
        raise DomainError("n_list must be a nonempty subset of {2,3,4,5}")
    ests = tuple(f_n(s, n, budget, seed=_seed_for(seed, "f", n, tuple(np.ravel(s)))) for n in n_list)
    vals = np.array([e.value for e in ests])
    ses = np.array([max(e.stderr, 1e-12) for e in ests])
    w = 1.0 / ses ** 2
    f = float(np.sum(w * vals) / np.sum(w))
    var = 1.0 / float(np.sum(w))
    if vals.size > 1:
        var += float(np.var(vals, ddof=1))
    fse = math.sqrt(var)
    big = ests[int(np.argmax(n_list))]
    return SigmaEstimate(-math.log(f), fse / f, f, fse, ests, -math.log(big.value))


def conjectured_sigma(s0, s1) -> float:
    """``-ln(e (s0 + s1) / pi * sin(pi s0 / (s0 + s1)))``."""
    s0, s1 = float(s0), float(s1)
    arg = math.e * (s0 + s1) / math.pi * math.sin(math.pi * s0 / (s0 + s1))
    return math.inf if arg <= 0 else -math.log(arg)


def conjecture_gap(s0, s1, s2_list, n_list=(2, 3), budget=None, seed=0):
    """Table of estimated sigma against the conjectured closed form.

    No pass/fail is attached; the report carries the gap sequence and
    whether it is monotone in ``s2``.
    """
    s2_list = [float(t) for t in s2_list]
    if any(b <= a for a, b in zip(s2_list, s2_list[1:])):
        raise DomainError("s2_list must be increasing")
    conj = conjectured_sigma(s0, s1)
    rows = []
    for s2 in s2_list:
        est = sigma_estimate((s0, s1, s2), n_list, budget, seed)
        rows.append({"s": [s0, s1, s2], "sigma": est.value, "stderr": est.stderr,
                     "conjecture": conj, "gap": est.value - conj})
    gaps = np.array([r["gap"] for r in rows])
    d = np.diff(gaps)
    return {"rows": rows, "conjecture": conj,
            "gap_monotone_decreasing": bool(np.all(d <= 0)),
            "gap_monotone_increasing": bool(np.all(d >= 0)),
            "abs_gap_shrinking": bool(np.all(np.diff(np.abs(gaps)) <= 0))}


# --------------------------------------------------------------------- tables

def _rep_key(logs, nd=9):
    """Direction class of a log-grid node (log-coordinates modulo the diagonal)."""
    c = np.asarray(logs) - np.mean(logs)
    return tuple(np.round(c, nd).tolist())


@dataclass(frozen=True, eq=False)
class SigmaTable:
    """Gridded ``sigma`` on a log-spaced cube with trilinear interpolation in ``log s``.

    ``axis`` is shared by the three coordinates.
    """

    axis: np.ndarray
    sigma: np.ndarray
    stderr: np.ndarray
    n_list: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        if ax.ndim != 1 or ax.size < 2 or np.any(np.diff(ax) <= 0) or ax[0] <= 0:
            raise DomainError("axis must be increasing and positive")
        sig = np.asarray(self.sigma, dtype=float).reshape((ax.size,) * 3)
        se = np.asarray(self.stderr, dtype=float).reshape((ax.size,) * 3)
        if not np.all(np.isfinite(sig)):
            raise DomainError("sigma must be finite on the grid")
        object.__setattr__(self, "axis", ax)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "stderr", se)
        object.__setattr__(self, "n_list", tuple(self.n_list))

    @property
    def version(self) -> str:
        h = hashlib.sha256()
        for a in (self.axis, self.sigma, self.stderr):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:12]

    @property
    def log_axis(self):
        return np.log(self.axis)

    def grid_points(self):
        ax = self.axis
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1)

    def _rescale(self, logs):
        """Shift ``log s`` along the diagonal into the grid cube."""
        L0, L1 = self.log_axis[0], self.log_axis[-1]
        lo = np.max(logs - L1, axis=-1)
        hi = np.min(logs - L0, axis=-1)
        eps = 1e-12
        if np.any(lo > hi + eps):
            raise DomainError("point beyond the homogeneity reach of the table "
                              f"(anisotropy exceeds {self.axis[-1] / self.axis[0]:g})")
        lt = np.clip(0.0, lo, hi)
        return logs - lt[..., None], lt

    def interpolate(self, s):
        """``sigma(s)`` for ``s`` of shape ``(..., 3)``."""
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            return np.full(s.shape[:-1], np.inf) if s.ndim > 1 else math.inf
        logs, lt = self._rescale(np.log(s))
        la = self.log_axis
        m = la.size
        idx = np.clip(np.searchsorted(la, logs, side="right") - 1, 0, m - 2)
        frac = (logs - la[idx]) / (la[idx + 1] - la[idx])
        frac = np.clip(frac, 0.0, 1.0)
        out = 0.0
        for c in range(8):
            bits = [(c >> k) & 1 for k in range(3)]
            w = 1.0
            ii = []
            for k, bt in enumerate(bits):
                w = w * (frac[..., k] if bt else 1.0 - frac[..., k])
                ii.append(idx[..., k] + bt)
            out = out + w * self.sigma[ii[0], ii[1], ii[2]]
        res = out - lt
        return float(res) if np.ndim(res) == 0 else res

    __call__ = interpolate

    def monotonicity_violations(self, k_sigma: float = 3.0):
        """Grid neighbours where ``sigma`` increases with ``s`` beyond noise."""
        bad = []
        for ax in range(3):
            d = np.diff(self.sigma, axis=ax)
            se = np.hypot(np.delete(self.stderr, 0, axis=ax), np.delete(self.stderr, -1, axis=ax))
            for idx in zip(*np.nonzero(d > k_sigma * se + 1e-12)):
                bad.append((ax, tuple(int(t) for t in idx)))
        return bad

    def convexity_certificate(self, pairs: int = 200, seed=0, k_sigma: float = 3.0):
        """Midpoint-convexity checks of the interpolant on random grid-node pairs."""
        rng = np.random.default_rng(seed)
        pts = self.grid_points().reshape(-1, 3)
        se = self.stderr.reshape(-1)
        sig = self.sigma.reshape(-1)
        worst = -np.inf
        viol = 0
        checked = 0
        for _ in range(pairs):
            i, j = rng.integers(0, len(pts), 2)
            if i == j:
                continue
            mid = 0.5 * (pts[i] + pts[j])
            try:
                sm = self.interpolate(mid)
            except DomainError:
                continue
            gap = sm - 0.5 * (sig[i] + sig[j])
            tol = k_sigma * math.hypot(se[i], se[j]) + 1e-12
            worst = max(worst, gap - tol)
            viol += gap > tol
            checked += 1
        return {"checked": checked, "violations": int(viol), "worst_excess": float(worst),
                "certified": bool(viol == 0)}

    def convex_model(self, smoothing: float = 1e-3):
        return ConvexSigma.fit(self, smoothing=smoothing)

    def to_json(self):
        return {"schema_version": 1, "grid": self.axis.tolist(),
                "sigma": self.sigma.tolist(), "stderr": self.stderr.tolist(),
                "n_list": list(self.n_list), "version": self.version, "meta": self.meta}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(np.asarray(obj["grid"], dtype=float), np.asarray(obj["sigma"]),
                   np.asarray(obj["stderr"]), tuple(obj["n_list"]), dict(obj.get("meta", {})))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def sigma_interpolate(table: SigmaTable, s):
    return table.interpolate(s)


def default_axis(lo=0.25, hi=4.0, points=5):
    return np.geomspace(lo, hi, points)


def sigma_table_build(grid_spec=None, budget=None, n_list=(2, 3), seed=0,
                      estimator=None) -> SigmaTable:
    """Estimate ``sigma`` on a log-spaced grid.

    Nodes on a common ray through the origin share one estimate, shifted by
    the homogeneity law, so each direction class is estimated once.

    Parameters
    ----------
    grid_spec : dict or array_like, optional
        ``{"lo", "hi", "points"}`` or an explicit axis. Default
        ``[0.25, 4]`` with 5 points.
    estimator : callable, optional
        ``estimator(s) -> (sigma, stderr)``; defaults to :func:`sigma_estimate`.
    """
    if grid_spec is None:
        axis = default_axis()
    elif isinstance(grid_spec, dict):
        axis = default_axis(grid_spec.get("lo", 0.25), grid_spec.get("hi", 4.0),
                            grid_spec.get("points", 5))
    else:
        axis = np.asarray(grid_spec, dtype=float)
    per_n = []
    if estimator is None:
        def estimator(s):
            e = sigma_estimate(s, n_list, budget, seed)
            per_n.append({"s": np.asarray(s).tolist(),
                          "f": {str(x.n): [x.value, x.stderr] for x in e.per_n}})
            log.info("sigma%s = %.4f +- %.4f", np.round(s, 4).tolist(), e.value, e.stderr)
            return e.value, e.stderr
    m = axis.size
    la = np.log(axis)
    sig = np.empty((m, m, m))
    se = np.empty((m, m, m))
    cache = {}
    for i in range(m):
        for j in range(m):
            for k in range(m):
                logs = np.array([la[i], la[j], la[k]])
                key = _rep_key(logs)
                if key not in cache:
                    cache[key] = (logs.mean(), *estimator(np.exp(logs)))
                lm, sv, sev = cache[key]
                sig[i, j, k] = sv - (logs.mean() - lm)
                se[i, j, k] = sev
    meta = {"directions": len(cache), "budget": budget, "seed": seed}
    if per_n:
        meta["per_n"] = per_n
    return SigmaTable(axis, sig, se, tuple(n_list), meta)


class ConvexSigma:
    """Convex, homogeneous surrogate ``-ln f_hat`` fitted to a table.

    ``f_hat(s) = t * softmin_tau(<w_j, s / t>)`` with ``t = s0 + s1 + s2``
    and nonnegative supergradients ``w_j`` from a least-absolute-deviation
    LP. Concavity and degree-1 homogeneity hold by construction, so the
    surrogate is convex and obeys ``sigma(t s) = sigma(s) - ln t`` exactly.
    """

    def __init__(self, W, tau, version="", fit_info=None):
        self.W = np.asarray(W, dtype=float)
        self.tau = float(tau)
        self.version = version
        self.fit_info = fit_info or {}

    @classmethod
    def fit(cls, table: SigmaTable, smoothing: float = 1e-3):
        pts = table.grid_points().reshape(-1, 3)
        sig = table.sigma.reshape(-1)
        se = table.stderr.reshape(-1)
        t = pts.sum(axis=1)
        U = pts / t[:, None]
        F = np.exp(-sig) / t
        FS = F * np.maximum(se, 1e-6)
        # one data point per direction
        keys = {}
        for r, u in enumerate(U):
            keys.setdefault(tuple(np.round(u, 9)), r)
        rows = list(keys.values())
        U, F, FS = U[rows], F[rows], FS[rows]
        N = len(rows)
        # variables: W (3N), fhat (N), ep (N), em (N)
        nv = 6 * N
        iw = lambda j: slice(3 * j, 3 * j + 3)
        ifh = 3 * N
        iep = 4 * N
        iem = 4 * N + N
        Aeq = np.zeros((2 * N, nv))
        beq = np.zeros(2 * N)
        for j in range(N):
            Aeq[j, iw(j)] = U[j]
            Aeq[j, ifh + j] = -1.0
            Aeq[N + j, ifh + j] = 1.0
            Aeq[N + j, iep + j] = -1.0
            Aeq[N + j, iem + j] = 1.0
            beq[N + j] = F[j]
        Aub = []
        for j in range(N):
            for k in range(N):
                if j == k:
                    continue
                row = np.zeros(nv)
                row[iw(j)] = -U[k]
                row[ifh + k] = 1.0
                Aub.append(row)
        Aub = np.array(Aub).reshape(-1, nv)
        c = np.zeros(nv)
        c[iep:iep + N] = 1.0 / FS
        c[iem:iem + N] = 1.0 / FS
        bounds = [(0, None)] * (3 * N) + [(0, None)] * N + [(0, None)] * (2 * N)
        res = linprog(c, A_ub=Aub if len(Aub) else None, b_ub=np.zeros(len(Aub)) if len(Aub) else None,
                      A_eq=Aeq, b_eq=beq, bounds=bounds, method="highs")
        if res.status != 0:
            raise NumericError(f"convex fit failed: {res.message}")
        W = res.x[:3 * N].reshape(N, 3)
        fh = res.x[ifh:ifh + N]
        dev = (fh - F) / FS
        tau = smoothing * float(np.mean(F))
        return cls(W, tau, table.version,
                   {"directions": N, "max_dev_sigma_units": float(np.max(np.abs(dev))),
                    "mean_abs_dev_sigma_units": float(np.mean(np.abs(dev)))})

    def f(self, s):
        s = np.asarray(s, dtype=float)
        t = s.sum(axis=-1)
        a = (s @ self.W.T) / t[..., None]  # (..., N)
        amin = a.min(axis=-1)
        if self.tau > 0:
            sm = amin - self.tau * np.log(np.sum(np.exp(-(a - amin[..., None]) / self.tau), axis=-1))
        else:
            sm = amin
        return t * sm

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            fv = self.f(s)
            out = np.where((fv > 0) & np.all(s > 0, axis=-1), -np.log(np.maximum(fv, 1e-300)), np.inf)
        return float(out) if np.ndim(out) == 0 else out

    def to_json(self):
        return {"W": self.W.tolist(), "tau": self.tau, "version": self.version,
                "fit": self.fit_info}
