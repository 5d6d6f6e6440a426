"""Dyadic surrogates of ``int sigma(Hessian)``, the rate functionals and the inner minimization."""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import lattice
from ._kernel import kernel_rule, theta, theta_unit  # noqa: F401  (re-exported)
from .errors import DegenerateCellError, DomainError, InfeasibleError, NumericError
from .hive import ContinuumHive, DiscreteHive, hive_from_boundary, interior_points, lift
from .polytope import build_hive_polytope, chebyshev_center
from .spectra import BoundaryProfile, discretize
from .surface_tension import ConvexSigma, SigmaTable
from .vandermonde import continuum_logV, log_ratio_to_tau

log = logging.getLogger(__name__)

MASS_FLOOR = 1e-6
N_WORK = 64
SIGMA_ENV = "HIVELAB_SIGMA_TABLE"


# ------------------------------------------------------------------ sigma source

class SigmaSource:
    """A convex ``sigma`` callable together with its provenance.

    ``table`` is the Monte Carlo table behind the model, if any.
    """

    def __init__(self, func, version: str = "custom", table: SigmaTable | None = None):
        self.func = func
        self.version = version
        self.table = table

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=float))


def default_sigma_table() -> SigmaTable:
    """Table named by ``$HIVELAB_SIGMA_TABLE``, else the packaged default."""
    path = os.environ.get(SIGMA_ENV)
    if path:
        return SigmaTable.load(path)
    with resources.files("hivelab").joinpath("data/sigma_default.json").open() as fh:
        return SigmaTable.from_json(json.load(fh))


def as_sigma(sigma=None) -> SigmaSource:
    """Normalize a table, model or callable to a :class:`SigmaSource`.

    Tables are replaced by their convex homogeneous model so that the
    objective is convex regardless of Monte Carlo noise in the table.
    """
    if isinstance(sigma, SigmaSource):
        return sigma
    if sigma is None:
        sigma = default_sigma_table()
    if isinstance(sigma, (str, os.PathLike)):
        sigma = SigmaTable.load(sigma)
    if isinstance(sigma, SigmaTable):
        model = sigma.convex_model()
        return SigmaSource(model, f"table:{sigma.version}/convex", sigma)
    if isinstance(sigma, ConvexSigma):
        return SigmaSource(sigma, f"convex:{sigma.version}")
    if callable(sigma):
        return SigmaSource(sigma, getattr(sigma, "version", "custom"))
    raise DomainError("sigma must be a SigmaTable, ConvexSigma or callable")


# ------------------------------------------------------------------ cell masses

def filled_masses(values, a: int):
    """Hessian masses ``s = -Delta`` per level-``a`` cell and kind.

    A cell holding no rhombus of some kind inherits that kind's mass from
    its nearest ancestor that holds one.

    Returns
    -------
    s : ndarray, shape (n_cells, 3)
    filled : int
        Number of inherited entries.
    """
    values = np.asarray(values, dtype=float)
    masses, counts = lattice.cell_masses(values, a)
    s = -masses
    missing = np.isnan(s)
    filled = int(missing.sum())
    if not filled:
        return s, 0
    cells = lattice.dyadic_partition(a)
    coarse = {a: s}
    for idx, kind in zip(*np.nonzero(missing)):
        c = cells[idx]
        val = np.nan
        while np.isnan(val) and c.level > 0:
            c = c.parent()
            if c.level not in coarse:
                coarse[c.level] = -lattice.cell_masses(values, c.level)[0]
            val = coarse[c.level][lattice.cell_index(c), kind]
        if np.isnan(val):
            raise DegenerateCellError(f"no {lattice.KIND_NAMES[kind]} rhombus in T at this n",
                                      cell=cells[idx], kind=kind)
        s[idx, kind] = val
    return s, filled


def level_masses(values, a: int, base_level: int | None = None):
    """Masses on level ``a``, optionally averaged down from a finer base level."""
    if base_level is None or base_level == a:
        s, _ = filled_masses(values, a)
        return s
    if base_level < a:
        raise DomainError("base_level must be >= a")
    s, _ = filled_masses(values, base_level)
    return lattice.aggregate_masses(s, base_level, a)


def _cell_sum(s, a, sig: SigmaSource):
    """``(sum_k |k| sigma(s_k), first cell at or below the floor)``."""
    bad = np.nonzero(np.any(~(s > MASS_FLOOR), axis=1))[0]
    if bad.size:
        return math.inf, lattice.dyadic_partition(a)[int(bad[0])]
    areas = lattice.cell_areas(a)
    return float(np.sum(areas * np.asarray(sig(s), dtype=float))), None


# ---------------------------------------------------------------- V of profiles

def _slope(profile, m: int = 4096):
    """Derivative of a profile; tabulated and linearly interpolated if not known."""
    if getattr(profile, "_deriv", None) is not None:
        return profile.derivative
    t = np.linspace(0.0, 1.0, m + 1)
    v = np.asarray(profile(t), dtype=float)
    d = np.gradient(v, t, edge_order=2)
    return lambda x: np.interp(x, t, d)


def profile_logV(profile) -> float:
    """Continuum ``log V`` of the spectrum encoded by a boundary profile."""
    return float(continuum_logV(_slope(profile)))


def _as_work_hive(h, n_work):
    """``(discrete hive, log V(nu), discrete?)``."""
    if isinstance(h, ContinuumHive):
        hd = lift(h, n_work)
        return hd, profile_logV(h.profiles()[2]), False
    if isinstance(h, DiscreteHive):
        n = h.n
        nu = np.diff(h.values[np.arange(n + 1), np.arange(n + 1)])
        return h, 2.0 / (n * n) * float(log_ratio_to_tau(nu)), True
    raise DomainError("h must be a DiscreteHive or ContinuumHive")


# -------------------------------------------------------------------- reports

@dataclass
class FunctionalReport:
    value: float
    sequence: dict
    converged: bool
    sigma_version: str
    log_V: float = float("nan")
    flags: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_json(self):
        def num(v):
            return v if np.isfinite(v) else ("-inf" if v < 0 else "inf")
        return {"value": num(self.value), "J_a": {str(k): num(v) for k, v in self.sequence.items()},
                "converged": bool(self.converged), "sigma_version": self.sigma_version,
                "log_V": num(self.log_V), "flags": list(self.flags),
                "trace": [num(t) for t in self.trace], "info": self.info}


def J_a(h, a: int, sigma=None, n_work: int = N_WORK, base_level: int | None = None,
        detail: bool = False):
    """``log J_a(h) = log V(nu) - sum_k |k| sigma(s_k)``.

    Parameters
    ----------
    h : ContinuumHive or DiscreteHive
        A continuum hive is sampled on ``T_{n_work}``; its ``V`` is the
        continuum value of its diagonal profile. A discrete hive uses
        ``(2/n^2) log(V(nu)/V(tau))``.
    a : int
        Dyadic level.
    sigma : SigmaTable, ConvexSigma or callable, optional
    base_level : int, optional
        Compute masses on this finer level and average them down to ``a``.
    detail : bool
        Also return a dict with the masses and the floor-violating cell.

    Returns
    -------
    float
        ``-inf`` if some cell mass is at or below the floor.
    """
    if a < 0:
        raise DomainError("a must be >= 0")
    sig = as_sigma(sigma)
    hd, logV, _ = _as_work_hive(h, n_work)
    s = level_masses(hd.values, a, base_level)
    if np.any(np.isnan(s)):
        idx = int(np.nonzero(np.isnan(s).any(axis=1))[0][0])
        raise DegenerateCellError("cell without rhombi", cell=lattice.dyadic_partition(a)[idx])
    total, bad = _cell_sum(s, a, sig)
    val = -math.inf if bad is not None else logV - total
    if detail:
        return val, {"log_V": logV, "sigma_sum": total, "masses": s,
                     "floor_cell": None if bad is None else (bad.shape, bad.level, bad.i, bad.j)}
    return val


def J_limit(h, a_max: int = 4, sigma=None, rtol: float = 1e-3, n_work: int = N_WORK,
            a_min: int = 1) -> FunctionalReport:
    """``J_a`` for ``a = a_min .. a_max`` with Cauchy-gap diagnostics.

    All levels average the masses of level ``a_max``, so the sequence is
    nonincreasing for convex ``sigma``.
    """
    if a_max < a_min:
        raise DomainError("a_max must be >= a_min")
    sig = as_sigma(sigma)
    hd, logV, _ = _as_work_hive(h, n_work)
    base, _ = filled_masses(hd.values, a_max)
    seq = {}
    flags = []
    for a in range(a_min, a_max + 1):
        s = lattice.aggregate_masses(base, a_max, a)
        total, bad = _cell_sum(s, a, sig)
        seq[a] = -math.inf if bad is not None else logV - total
        if bad is not None:
            flags.append(f"floor_cell:a={a}:{bad.shape}({bad.i},{bad.j})")
    vals = np.array(list(seq.values()))
    gaps = np.abs(np.diff(vals)) if vals.size > 1 else np.zeros(0)
    finite = bool(np.all(np.isfinite(vals)))
    converged = finite and (gaps.size == 0 or gaps[-1] < rtol)
    if gaps.size > 1 and finite and np.any(np.diff(gaps) > 1e-12 + 1e-9 * gaps[:-1]):
        flags.append("gaps_not_decreasing")
    if finite and not converged:
        flags.append("not_converged")
    return FunctionalReport(float(vals[-1]), seq, converged, sig.version, logV, flags,
                            info={"gaps": gaps.tolist(), "n_work": n_work, "rtol": rtol,
                                  "mass_floor": MASS_FLOOR})


def I1(h: ContinuumHive, sigma=None, a_max: int = 4, n_work: int = N_WORK) -> float:
    """``-log J(h) + log V(lambda) + log V(mu)`` from the boundary profiles of ``h``."""
    rep = J_limit(h, a_max, sigma, n_work=n_work)
    if not np.isfinite(rep.value):
        return math.inf
    alpha, beta, _ = h.profiles()
    la, lb = profile_logV(alpha), profile_logV(beta)
    if not (np.isfinite(la) and np.isfinite(lb)):
        return math.inf
    return -rep.value + la + lb


def jensen_violations(h, a_max: int = 4, sigma=None, n_work: int = N_WORK, tol: float = 1e-10):
    """Parent/child pairs where ``sigma(parent mass)`` exceeds the child average.

    Coarse masses are area-weighted means of the level-``a_max`` masses.
    Returns ``(violations, pairs_checked)``.
    """
    sig = as_sigma(sigma)
    hd, _, _ = _as_work_hive(h, n_work)
    base, _ = filled_masses(hd.values, a_max)
    levels = {a_max: base}
    for a in range(a_max - 1, -1, -1):
        levels[a] = lattice.aggregate_masses(levels[a + 1], a + 1, a)
    sv = {a: np.asarray(sig(m), dtype=float) for a, m in levels.items()}
    out = []
    pairs = 0
    for a in range(a_max):
        for pc in lattice.dyadic_partition(a):
            kids = pc.children()
            w = np.array([float(c.area / pc.area) for c in kids])
            child = np.array([sv[a + 1][lattice.cell_index(c)] for c in kids])
            lhs = sv[a][lattice.cell_index(pc)]
            rhs = float(w @ child)
            pairs += 1
            if lhs > rhs + tol * max(1.0, abs(rhs)):
                out.append({"parent": (pc.shape, a, pc.i, pc.j), "excess": lhs - rhs})
    return out, pairs


# ------------------------------------------------------------- minimization

@dataclass
class MinimizeResult:
    hive: DiscreteHive
    x: np.ndarray
    objective: float
    trace: list
    stalled: bool
    iterations: int
    info: dict = field(default_factory=dict)

    def to_json(self):
        return {"objective": self.objective, "x": self.x.tolist(), "trace": self.trace,
                "stalled": self.stalled, "iterations": self.iterations,
                "hive": self.hive.to_json(), **self.info}


class SigmaObjective:
    """``x -> sum_k |k| sigma(s_k)`` for the hive with interior values ``x``.

    Masses are affine in ``x`` and are precomputed as ``S x + s0``.
    """

    def __init__(self, lam, mu, nu, a: int, sigma=None):
        self.lam, self.mu, self.nu = (np.asarray(v, dtype=float) for v in (lam, mu, nu))
        self.a = a
        self.sigma = as_sigma(sigma)
        self.points = interior_points(self.lam.size)
        d = len(self.points)
        self.d = d
        s0, self.filled = filled_masses(self._values(np.zeros(d)), a)
        cols = [filled_masses(self._values(e), a)[0] - s0 for e in np.eye(d)]
        self.s0 = s0
        self.S = np.stack(cols, axis=-1) if d else np.zeros(s0.shape + (0,))
        self.areas = lattice.cell_areas(a)

    def _values(self, x):
        return hive_from_boundary(self.lam, self.mu, self.nu, x)

    def masses(self, x):
        return self.s0 + self.S @ np.asarray(x, dtype=float)

    def __call__(self, x):
        s = self.masses(x)
        if np.any(~(s > MASS_FLOOR)):
            return math.inf
        return float(np.sum(self.areas * np.asarray(self.sigma(s), dtype=float)))

    def grad(self, x, h=1e-6):
        x = np.asarray(x, dtype=float)
        g = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h * max(1.0, abs(x[i]))
            g[i] = (self(x + e) - self(x - e)) / (2 * e[i])
        return g


def dykstra_project(x, A, b, tol: float = 1e-8, max_sweeps: int = 10_000):
    """Euclidean projection onto ``{A x <= b}`` by Dykstra's algorithm."""
    x = np.array(x, dtype=float)
    if A.shape[0] == 0 or np.all(A @ x <= b + tol):
        return x
    m = A.shape[0]
    nrm2 = np.einsum("ij,ij->i", A, A)
    inc = np.zeros((m, x.size))
    for _ in range(max_sweeps):
        prev = x.copy()
        for i in range(m):
            y = x + inc[i]
            r = A[i] @ y - b[i]
            x = y - (max(r, 0.0) / nrm2[i]) * A[i]
            inc[i] = y - x
        if np.max(A @ x - b) <= tol and np.max(np.abs(x - prev)) <= tol:
            return x
    raise NumericError("projection did not converge")


def minimize_sigma_integral(lam, mu, nu, a: int = 1, iters: int = 500, sigma=None,
                            tol: float = 1e-12, x0=None) -> MinimizeResult:
    """Minimize the dyadic ``sigma`` integral over the hive polytope.

    Projected gradient descent with Armijo backtracking; the projection is
    Dykstra's alternating projection onto the rhombus half-spaces. The best
    iterate is returned.

    Raises
    ------
    InfeasibleError
        If no hive with strictly positive masses exists for the boundary.
    """
    sys = build_hive_polytope(lam, mu, nu)
    obj = SigmaObjective(lam, mu, nu, a, sigma)
    A, b = sys.A, sys.b
    d = obj.d
    if d == 0:
        val = obj(np.zeros(0))
        h = DiscreteHive(hive_from_boundary(lam, mu, nu))
        return MinimizeResult(h, np.zeros(0), val, [val], False, 0,
                              {"sigma_version": obj.sigma.version})
    if x0 is None:
        c, r = chebyshev_center(A, b)
        if not r > 0:
            raise InfeasibleError("hive polytope has empty interior")
        x = c
    else:
        x = np.asarray(x0, dtype=float)
    f = obj(x)
    if not np.isfinite(f):
        raise InfeasibleError("starting hive has a cell mass below the floor")
    trace = [f]
    best_x, best_f = x.copy(), f
    t = 1.0
    stalled = False
    it = 0
    for it in range(1, iters + 1):
        g = obj.grad(x)
        accepted = False
        for _ in range(60):
            xn = dykstra_project(x - t * g, A, b)
            step = xn - x
            fn = obj(xn)
            if np.isfinite(fn) and fn <= f + g @ step + (step @ step) / (2 * t):
                accepted = True
                break
            t *= 0.5
        if not accepted or np.linalg.norm(step) <= tol * (1 + np.linalg.norm(x)):
            break
        x, f = xn, fn
        trace.append(f)
        if f < best_f:
            best_x, best_f = x.copy(), f
        t *= 2.0
        if len(trace) > 50:
            old = trace[-51]
            if old - f < 1e-6 * max(1.0, abs(old)):
                stalled = True
                break
    h = DiscreteHive(hive_from_boundary(lam, mu, nu, best_x))
    return MinimizeResult(h, best_x, best_f, trace, stalled, it,
                          {"sigma_version": obj.sigma.version, "a": a,
                           "filled_entries": obj.filled})


def rate_I(gamma: BoundaryProfile, alpha: BoundaryProfile, beta: BoundaryProfile, n: int,
           a: int = 1, sigma=None, iters: int = 500):
    """``log V(lambda) + log V(mu) - log V(nu) + min sum_k |k| sigma``.

    Returns ``(value, MinimizeResult or None)``; infeasible boundaries give
    ``+inf``.
    """
    lam, mu, nu = (discretize(p, n).values for p in (alpha, beta, gamma))
    try:
        res = minimize_sigma_integral(lam, mu, nu, a, iters, sigma)
    except InfeasibleError:
        return math.inf, None
    lv = [profile_logV(p) for p in (alpha, beta, gamma)]
    if not all(np.isfinite(lv)):
        return math.inf, res
    return lv[0] + lv[1] - lv[2] + res.objective, res


def golden_section(fun, lo: float, hi: float, tol: float = 1e-10, maxiter: int = 500):
    """Minimizer of a unimodal function on ``[lo, hi]``."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)
