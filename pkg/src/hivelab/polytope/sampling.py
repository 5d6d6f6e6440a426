"""Vectorized hit-and-run over ``{u : A u <= b}`` (optionally intersected with a ball)."""
from __future__ import annotations

import numpy as np

from ..errors import DomainError, UnboundedError
from .lp import interior_point


class Walker:
    """Independent hit-and-run chains sharing one polytope.

    Parameters
    ----------
    A, b : ndarray
        Rows of the body in the walker's coordinates.
    start : ndarray, shape (C, k)
        Strictly interior starting points, one per chain.
    rng : numpy.random.Generator
    center, radius : optional
        Extra constraint ``|u - center| <= radius``.
    """

    def __init__(self, A, b, start, rng, center=None, radius=None):
        self.A = np.ascontiguousarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.u = np.array(np.atleast_2d(start), dtype=float)
        if self.u.shape[1] != self.A.shape[1]:
            raise DomainError("start has the wrong dimension")
        self.rng = rng
        self.center = None if center is None else np.asarray(center, dtype=float)
        self.radius = radius
        self.zero_chords = 0
        self.steps = 0
        self._refresh()

    @property
    def chains(self):
        return self.u.shape[0]

    @property
    def k(self):
        return self.u.shape[1]

    def _refresh(self):
        self.slack = self.b[None, :] - self.u @ self.A.T

    def set_ball(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = radius

    def move_to(self, u):
        self.u = np.array(u, dtype=float)
        self._refresh()

    def _chord(self, d):
        Ad = d @ self.A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.slack / Ad
        pos = Ad > 1e-14
        neg = Ad < -1e-14
        hi = np.min(np.where(pos, ratio, np.inf), axis=1)
        lo = np.max(np.where(neg, ratio, -np.inf), axis=1)
        if self.center is not None:
            w = self.u - self.center
            wd = np.sum(w * d, axis=1)
            disc = wd * wd - np.sum(w * w, axis=1) + self.radius ** 2
            root = np.sqrt(np.maximum(disc, 0.0))
            hi = np.minimum(hi, -wd + root)
            lo = np.maximum(lo, -wd - root)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise UnboundedError("hit-and-run chord is unbounded")
        # rounding can leave a point a hair outside; never step outward
        hi = np.maximum(hi, 0.0)
        lo = np.minimum(lo, 0.0)
        return Ad, lo, hi

    def step(self, n: int = 1, record=None):
        """Advance all chains ``n`` steps; ``record(u)`` is called after each."""
        C, k = self.u.shape
        for _ in range(n):
            d = self.rng.standard_normal((C, k))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            Ad, lo, hi = self._chord(d)
            bad = hi - lo <= 1e-15 * (1.0 + np.abs(hi) + np.abs(lo))
            tries = 0
            while np.any(bad) and tries < 10:
                self.zero_chords += int(bad.sum())
                dn = self.rng.standard_normal((int(bad.sum()), k))
                dn /= np.linalg.norm(dn, axis=1, keepdims=True)
                d[bad] = dn
                Ad, lo, hi = self._chord(d)
                bad = hi - lo <= 1e-15 * (1.0 + np.abs(hi) + np.abs(lo))
                tries += 1
            t = lo + (hi - lo) * self.rng.random(C)
            self.u += t[:, None] * d
            self.slack -= t[:, None] * Ad
            self.steps += 1
            if self.steps % 64 == 0:
                self._refresh()
            if record is not None:
                record(self.u)
        return self.u


def hit_and_run(sys, start=None, steps: int = 1000, seed=0, chains: int = 1,
                thin: int = 1, burn: int = 0):
    """Uniform samples from a polytope by hit-and-run.

    Directions are isotropic in an orthonormal basis of the equality
    subspace, so the chain targets the intrinsic uniform measure.

    Parameters
    ----------
    sys : LinearInequalitySystem
    start : array_like, optional
        Strictly interior point in full coordinates (default: Chebyshev centre).
    steps : int
        Number of recorded states per chain.
    seed : int or numpy.random.SeedSequence
    chains : int
    thin, burn : int

    Returns
    -------
    samples : ndarray, shape (steps, d) if ``chains == 1`` else (steps, chains, d)
    zero_chords : int
    """
    red = sys.reduced
    if start is None:
        z0 = interior_point(sys).z
    else:
        z0 = red.to_reduced(np.asarray(start, dtype=float))
        if np.any(red.b - red.A @ z0 <= 0):
            raise DomainError("start point is not strictly interior")
    rng = np.random.default_rng(seed)
    if red.k == 0:
        pts = np.broadcast_to(red.to_full(np.zeros(0)), (steps, chains, sys.d)).copy()
        return (pts[:, 0] if chains == 1 else pts), 0
    w = Walker(red.A, red.b, np.tile(z0, (chains, 1)), rng)
    if burn:
        w.step(burn)
    out = np.empty((steps, chains, red.k))
    for s in range(steps):
        w.step(thin)
        out[s] = w.u
    full = red.to_full(out)
    return (full[:, 0] if chains == 1 else full), w.zero_chords
