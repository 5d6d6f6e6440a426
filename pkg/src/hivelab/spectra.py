"""Boundary profiles, their spectra and the partial-sum seminorm."""
from __future__ import annotations

import enum
import json
from typing import Callable

import numpy as np

from .errors import DomainError, InvariantError

CERT_KNOTS = 2 ** 14


class SeminormMode(str, enum.Enum):
    SORTED_PREFIX = "sorted_prefix"
    ANTIDERIVATIVE_SUP = "antiderivative_sup"


def _mode(mode) -> SeminormMode:
    if isinstance(mode, SeminormMode):
        return mode
    try:
        return SeminormMode(str(mode).lower())
    except ValueError:
        raise DomainError(f"unknown seminorm mode {mode!r}") from None


class SpectrumVec:
    """A nonincreasing, zero-sum real vector.

    Parameters
    ----------
    values : array_like
    tol : float
        Relative tolerance for the zero-sum and ordering checks.
    """

    __slots__ = ("_v",)

    def __init__(self, values, tol: float = 1e-9):
        v = np.array(values, dtype=float).ravel()
        if v.size == 0:
            raise InvariantError("empty spectrum")
        if not np.all(np.isfinite(v)):
            raise InvariantError("spectrum has non-finite entries")
        scale = max(float(np.max(np.abs(v))), 1.0)
        if abs(v.sum()) > tol * v.size * scale:
            raise InvariantError(f"spectrum does not sum to zero (sum={v.sum():.3g})")
        if np.any(np.diff(v) > tol * scale):
            raise InvariantError("spectrum is not nonincreasing")
        v.setflags(write=False)
        self._v = v

    @classmethod
    def centered(cls, values):
        """Sort decreasing and subtract the mean; returns ``(vec, shift)``."""
        v = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
        shift = float(v.mean())
        return cls(v - shift), shift

    @property
    def values(self) -> np.ndarray:
        return self._v

    @property
    def n(self) -> int:
        return self._v.size

    def cumulative(self) -> np.ndarray:
        """Partial sums ``(0, v1, v1+v2, ..., sum)`` of length ``n+1``."""
        return np.concatenate([[0.0], np.cumsum(self._v)])

    def __array__(self, dtype=None, copy=None):
        return np.array(self._v, dtype=dtype)

    def __len__(self):
        return self._v.size

    def __iter__(self):
        return iter(self._v.tolist())

    def __getitem__(self, k):
        return self._v[k]

    def __eq__(self, other):
        try:
            return np.array_equal(self._v, np.asarray(other, dtype=float))
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self._v.tobytes())

    def __mul__(self, t):
        return SpectrumVec(float(t) * self._v) if t >= 0 else NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectrumVec({self._v.tolist()})"


def as_spectrum(v) -> SpectrumVec:
    return v if isinstance(v, SpectrumVec) else SpectrumVec(v)


class BoundaryProfile:
    """A concave function on [0, 1] vanishing at both endpoints.

    Either a vectorized callable (with optional derivative) or piecewise
    linear samples at equispaced knots.
    """

    def __init__(self, func: Callable | None = None, knots=None,
                 derivative: Callable | None = None, name: str = "custom",
                 params: dict | None = None):
        if (func is None) == (knots is None):
            raise DomainError("give exactly one of func or knots")
        self._func = func
        self._deriv = derivative
        self.knots = None if knots is None else np.asarray(knots, dtype=float)
        if self.knots is not None and self.knots.size < 2:
            raise DomainError("need at least two knots")
        self.name = name
        self.params = dict(params or {})

    # constructors
    @classmethod
    def quadratic(cls, c: float = 1.0):
        """``c (t - t**2)``."""
        c = float(c)
        return cls(lambda t: c * (np.asarray(t) - np.asarray(t) ** 2),
                   derivative=lambda t: c * (1.0 - 2.0 * np.asarray(t)),
                   name="quadratic", params={"c": c})

    @classmethod
    def pwl(cls, knots):
        return cls(knots=knots, name="pwl")

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "quadratic":
            c = obj.get("c")
            if c is None:
                knots = obj.get("knots") or [1.0]
                c = knots[0]
            return cls.quadratic(c)
        if kind == "pwl":
            return cls.pwl(obj["knots"])
        raise DomainError(f"unknown profile kind {kind!r}")

    def to_json(self) -> dict:
        if self.name == "quadratic":
            return {"kind": "quadratic", "c": self.params["c"], "knots": [self.params["c"]]}
        if self.knots is not None:
            return {"kind": "pwl", "knots": self.knots.tolist()}
        t = np.linspace(0, 1, 257)
        return {"kind": "pwl", "knots": self(t).tolist()}

    # evaluation
    def __call__(self, t):
        if self._func is not None:
            return self._func(t)
        m = self.knots.size - 1
        return np.interp(t, np.linspace(0.0, 1.0, m + 1), self.knots)

    def derivative(self, t):
        """Left derivative (right derivative at 0)."""
        t = np.asarray(t, dtype=float)
        if self._deriv is not None:
            return self._deriv(t)
        if self.knots is not None:
            m = self.knots.size - 1
            slopes = np.diff(self.knots) * m
            seg = np.clip(np.ceil(t * m).astype(int) - 1, 0, m - 1)
            return slopes[seg]
        h = 1e-6
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (self(hi) - self(lo)) / (hi - lo)

    def __mul__(self, s):
        s = float(s)
        if self.name == "quadratic":
            return BoundaryProfile.quadratic(s * self.params["c"])
        if self.knots is not None:
            return BoundaryProfile.pwl(s * self.knots)
        f, d = self._func, self._deriv
        return BoundaryProfile(lambda t: s * f(t),
                               derivative=None if d is None else (lambda t: s * d(t)))

    __rmul__ = __mul__

    def validate(self, tol: float = 1e-9):
        """Certify endpoint zeros, concavity and a Lipschitz bound.

        Returns the Lipschitz bound on success.
        """
        if self.knots is not None:
            v = self.knots
        else:
            v = np.asarray(self(np.linspace(0.0, 1.0, CERT_KNOTS + 1)), dtype=float)
        scale = max(float(np.max(np.abs(v))), 1.0)
        if abs(v[0]) > tol * scale or abs(v[-1]) > tol * scale:
            raise InvariantError("profile does not vanish at the endpoints")
        mid = v[1:-1] - 0.5 * (v[:-2] + v[2:])
        if np.any(mid < -tol * scale):
            raise InvariantError("profile is not concave")
        lip = float(np.max(np.abs(np.diff(v)))) * (v.size - 1)
        if not np.isfinite(lip):
            raise InvariantError("profile is not Lipschitz")
        return lip


def discretize(profile: BoundaryProfile, n: int) -> SpectrumVec:
    """``lambda_n(i) = n**2 (alpha(i/n) - alpha((i-1)/n))``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    t = np.arange(n + 1) / n
    a = np.asarray(profile(t), dtype=float)
    lam = n * n * np.diff(a)
    # endpoints are zero, remove rounding residue in the sum
    scale = max(float(np.max(np.abs(lam))), 1.0)
    if abs(a[0]) > 1e-9 * scale or abs(a[-1]) > 1e-9 * scale:
        raise InvariantError("profile does not vanish at the endpoints")
    lam = lam - lam.mean()
    if np.any(np.diff(lam) > 1e-9 * scale):
        raise InvariantError("profile is not concave: increments increase")
    return SpectrumVec(lam)


def tau(n: int) -> SpectrumVec:
    """The staircase ``((n-1)/2, (n-3)/2, ..., -(n-1)/2)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return SpectrumVec((n - 1 - 2 * np.arange(n)) / 2.0)


def seminorm_I(v, mode=SeminormMode.ANTIDERIVATIVE_SUP) -> float:
    """Partial-sum seminorm of the centered vector ``v``.

    ``sorted_prefix`` sorts decreasingly before taking the largest prefix
    sum; ``antiderivative_sup`` takes the largest absolute prefix sum of
    the vector as given.
    """
    mode = _mode(mode)
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    c = v - v.mean()
    if mode is SeminormMode.SORTED_PREFIX:
        c = np.sort(c)[::-1]
        return float(max(np.max(np.cumsum(c)), 0.0))
    return float(np.max(np.abs(np.cumsum(c))))


def seminorm_I_batch(V, mode=SeminormMode.ANTIDERIVATIVE_SUP) -> np.ndarray:
    """Row-wise :func:`seminorm_I` for a 2-D array."""
    mode = _mode(mode)
    V = np.asarray(V, dtype=float)
    C = V - V.mean(axis=1, keepdims=True)
    if mode is SeminormMode.SORTED_PREFIX:
        C = -np.sort(-C, axis=1)
        return np.maximum(np.max(np.cumsum(C, axis=1), axis=1), 0.0)
    return np.max(np.abs(np.cumsum(C, axis=1)), axis=1)


def ball_constraints_I(center, radius: float):
    """Half-spaces ``|sum_{k<=i} (v_k - nu_k)| <= radius``, ``i < n``.

    Returns
    -------
    A : ndarray, shape (2(n-1), n)
        Coefficients on the raw coordinates ``v``.
    b : ndarray, shape (2(n-1),)
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    nu = np.asarray(center, dtype=float).ravel()
    n = nu.size
    L = np.tril(np.ones((n - 1, n)))  # row i sums the first i+1 entries
    s = np.cumsum(nu)[: n - 1]
    A = np.vstack([L, -L])
    b = np.concatenate([s + radius, -s + radius])
    return A, b
