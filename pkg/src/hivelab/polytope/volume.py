"""Monte Carlo volume of polytopes: rejection in a box, or an annealed ball schedule."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ..errors import DomainError, InfeasibleError, NumericError
from .lp import FEAS_TOL, bounding_box, chebyshev_center, interior_point
from .sampling import Walker

PHASE_RATIO = 0.75
DEFAULT_CHAINS = 64
BATCHES = 8


@dataclass(frozen=True)
class VolumeEstimate:
    """Log-volume in the intrinsic coordinates of the system's equality subspace.

    A 0-dimensional (single point) system has ``log_volume = 0``: the
    counting measure of its one point.
    """

    log_volume: float
    stderr: float
    method: str
    samples: int
    dimension: int
    flags: tuple = ()
    info: dict = field(default_factory=dict, compare=False)

    @property
    def volume(self) -> float:
        return math.exp(self.log_volume) if self.log_volume > -np.inf else 0.0

    @property
    def volume_stderr(self) -> float:
        return self.volume * self.stderr

    def to_json(self):
        return {"log_volume": self.log_volume, "stderr": self.stderr,
                "volume": self.volume, "volume_stderr": self.volume_stderr,
                "method": self.method, "samples": self.samples,
                "dimension": self.dimension, "flags": list(self.flags)}


def log_ball_volume(k: int, r: float) -> float:
    return 0.5 * k * math.log(math.pi) - gammaln(0.5 * k + 1) + k * math.log(r)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _rejection(A, b, budget, rng, chunk=1 << 16):
    lo, hi = bounding_box(A, b)
    width = hi - lo
    k = A.shape[1]
    if np.any(width <= 0):
        return VolumeEstimate(-np.inf, 0.0, "rejection", 0, k, ("lower_dimensional",))
    log_box = float(np.sum(np.log(width)))
    hits = 0
    done = 0
    while done < budget:
        m = min(chunk, budget - done)
        x = lo + width * rng.random((m, k))
        hits += int(np.count_nonzero(np.all(x @ A.T <= b, axis=1)))
        done += m
    if hits == 0:
        # rule of three: volume below 3/N of the box at 95% confidence
        return VolumeEstimate(-np.inf, np.inf, "rejection", done, k, ("zero_hits",),
                              {"log_upper_bound_95": log_box + math.log(3.0 / done)})
    p = hits / done
    return VolumeEstimate(log_box + math.log(p), math.sqrt((1 - p) / (done * p)),
                          "rejection", done, k, (), {"hit_rate": p, "log_box": log_box})


def _round(A, b, rng, chains, max_rounds: int = 12, target: float = 4.0):
    """Affine map ``z = m + T u`` making the uniform measure roughly isotropic.

    Rounds repeat, with chains carried over, until the sample covariance in
    the current coordinates has eigenvalue ratio below ``target``.

    Returns
    -------
    m, T, logdet, used, u
        ``u`` are the final chain states in the rounded coordinates.
    """
    k = A.shape[1]
    m = np.zeros(k)
    T = np.eye(k)
    logdet = 0.0
    used = 0
    c, _ = chebyshev_center(A, b)
    u = np.tile(c, (chains, 1))
    for _ in range(max_rounds):
        w = Walker(A @ T, b - A @ m, u, rng)
        w.step(max(50, 8 * k))
        pts = []
        w.step(max(200, 20 * k), record=lambda v: pts.append(v.copy()))
        used += w.steps * chains
        P = np.concatenate(pts)
        mu = P.mean(axis=0)
        cov = np.cov(P, rowvar=False).reshape(k, k)
        ev = np.linalg.eigvalsh(cov)
        try:
            L = np.linalg.cholesky(cov + 1e-12 * np.trace(cov) / k * np.eye(k))
        except np.linalg.LinAlgError:
            u = w.u
            break
        m = m + T @ mu
        T = T @ L
        logdet += float(np.sum(np.log(np.diag(L))))
        u = np.linalg.solve(L, (w.u - mu).T).T
        if ev[0] > 0 and ev[-1] / ev[0] < target:
            break
    return m, T, logdet, used, u


def _annealed(A, b, budget, rng, chains=DEFAULT_CHAINS, ratio=PHASE_RATIO, batches=BATCHES):
    k = A.shape[1]
    m, T, logdet, used, u0 = _round(A, b, rng, chains)
    Au = A @ T
    bu = b - A @ m
    c, r_in = chebyshev_center(Au, bu)
    lo, hi = bounding_box(Au, bu)
    R = float(np.linalg.norm(np.maximum(np.abs(lo - c), np.abs(hi - c))))
    log_box = float(np.sum(np.log(hi - lo)))
    est_phases = max(1, int(math.ceil((log_box - log_ball_volume(k, r_in)) / -math.log(ratio))))
    per_phase = max(60, int((budget - used) / (chains * est_phases)))
    n_pilot = max(10, per_phase // 5)
    n_burn = max(2 * k, per_phase // 5)
    n_est = max(30, per_phase - n_pilot - n_burn)

    w = Walker(Au, bu, u0, rng, center=c, radius=R * (1 + 1e-9))
    w.step(max(n_burn, 4 * k))
    log_ratio = 0.0
    var = 0.0
    phases = []
    per_chain = []
    r = R
    while True:
        d = []
        w.step(n_pilot, record=lambda u: d.append(np.linalg.norm(u - c, axis=1)))
        r_next = float(np.quantile(np.concatenate(d), ratio))
        last = r_next <= r_in
        if last:
            r_next = r_in
        inside = np.zeros(chains)

        def rec(u):
            inside.__iadd__(np.linalg.norm(u - c, axis=1) <= r_next)

        w.step(n_est, record=rec)
        pc = inside / n_est
        p = float(pc.mean())
        if p <= 0:
            raise NumericError("annealing phase with zero acceptance")
        log_ratio += math.log(p)
        var += float(np.var(pc, ddof=1)) / (chains * p * p)
        per_chain.append(pc)
        phases.append((r, r_next, p))
        if last or len(phases) > 2000:
            break
        dist = np.linalg.norm(w.u - c, axis=1)
        out = dist > r_next
        if np.any(out):
            u = w.u.copy()
            u[out] = c + (u[out] - c) * (0.99 * r_next / dist[out])[:, None]
            w.move_to(u)
        w.set_ball(c, r_next)
        w.step(n_burn)
        r = r_next
    logv = logdet + log_ball_volume(k, r_in) - log_ratio
    # batch means over chains: each batch runs the whole telescoping product,
    # so correlation between phases within a chain is kept
    pcs = np.array(per_chain)  # (phases, chains)
    groups = np.array_split(np.arange(chains), min(batches, chains))
    with np.errstate(divide="ignore"):
        tot = np.array([np.sum(np.log(pcs[:, g].mean(axis=1))) for g in groups])
    if np.all(np.isfinite(tot)) and len(groups) > 1:
        se_batch = float(np.std(tot, ddof=1)) / math.sqrt(len(groups))
    else:
        se_batch = math.inf
    se = max(math.sqrt(var), se_batch)
    flags = () if phases[-1][1] == r_in else ("schedule_truncated",)
    return VolumeEstimate(logv, se, "annealed", used + w.steps * chains, k, flags,
                          {"phases": len(phases), "r_in": r_in, "R": R,
                           "zero_chords": w.zero_chords, "stderr_phase": math.sqrt(var),
                           "stderr_batch": se_batch})


def estimate_volume(sys, method: str = "auto", budget: int | None = None, seed=0,
                    chains: int = DEFAULT_CHAINS) -> VolumeEstimate:
    """Volume of a bounded polytope in its intrinsic coordinates.

    Parameters
    ----------
    sys : LinearInequalitySystem
    method : {"auto", "rejection", "annealed"}
        ``auto`` uses rejection up to dimension 4.
    budget : int, optional
        Number of sample points (rejection) or chain steps (annealed).
    seed : int, SeedSequence or Generator

    Returns
    -------
    VolumeEstimate
        ``log_volume = -inf`` with a flag when the body is empty or lower
        dimensional.
    """
    red = sys.reduced
    k = red.k
    rng = _rng(seed)
    scale = max(1.0, float(np.max(np.abs(sys.b), initial=0.0)))
    if red.const_violation > FEAS_TOL * scale:
        return VolumeEstimate(-np.inf, 0.0, "none", 0, k, ("infeasible",))
    if k == 0:
        ok = np.all(red.b >= -FEAS_TOL * scale)
        return VolumeEstimate(0.0 if ok else -np.inf, 0.0, "point", 0, 0,
                              () if ok else ("infeasible",))
    try:
        interior_point(sys)
    except InfeasibleError:
        return VolumeEstimate(-np.inf, 0.0, "none", 0, k, ("empty_interior",))
    if method == "auto":
        method = "rejection" if k <= 4 else "annealed"
    if method == "rejection":
        if k > 8:
            raise DomainError("rejection is limited to dimension 8")
        return _rejection(red.A, red.b, int(budget or 1_000_000), rng)
    if method == "annealed":
        if k > 24:
            raise DomainError("annealed volume is limited to dimension 24")
        return _annealed(red.A, red.b, int(budget or 4_000_000), rng, chains=chains)
    raise DomainError(f"unknown method {method!r}")
