"""H-representation carrier ``A x <= b, A_eq x = b_eq``."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import null_space

from ..errors import DomainError, InfeasibleError


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Reduced:
    """The system restricted to its equality subspace.

    Points are ``x = origin + basis @ z``; rows are ``A z <= b``.
    """

    A: np.ndarray
    b: np.ndarray
    basis: np.ndarray
    origin: np.ndarray
    const_violation: float  # worst violation among rows that vanish on the subspace

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def to_full(self, z):
        z = np.asarray(z, dtype=float)
        return self.origin + z @ self.basis.T

    def to_reduced(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.origin) @ self.basis


@dataclass(frozen=True, eq=False)
class LinearInequalitySystem:
    """Polyhedron ``{x : A x <= b, A_eq x = b_eq}``.

    Parameters
    ----------
    A, b : array_like
        Inequality rows.
    A_eq, b_eq : array_like, optional
        Equality rows.
    names : tuple, optional
        One label per coordinate (e.g. lattice points).
    labels : tuple, optional
        One label per inequality row.
    """

    A: np.ndarray
    b: np.ndarray
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    names: tuple = ()
    labels: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.size == 0:
            d = len(self.names) if self.names else (A.shape[1] if A.ndim == 2 else 0)
            A = np.zeros((b.size, d))
        d = A.shape[1]
        if A.shape[0] != b.size:
            raise DomainError("A and b have inconsistent row counts")
        if self.A_eq is None or np.size(self.A_eq) == 0:
            Ae = np.zeros((0, d))
            be = np.zeros(0)
        else:
            Ae = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
            be = np.asarray(self.b_eq, dtype=float).ravel()
        if Ae.shape[1] != d or Ae.shape[0] != be.size:
            raise DomainError("equality rows do not match the dimension")
        if self.names and len(self.names) != d:
            raise DomainError("names must have one entry per coordinate")
        object.__setattr__(self, "A", _ro(A))
        object.__setattr__(self, "b", _ro(b))
        object.__setattr__(self, "A_eq", _ro(Ae))
        object.__setattr__(self, "b_eq", _ro(be))
        object.__setattr__(self, "names", tuple(self.names) or tuple(range(d)))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def d(self) -> int:
        """Number of coordinates."""
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @cached_property
    def reduced(self) -> Reduced:
        d = self.d
        if self.A_eq.shape[0] == 0:
            N = np.eye(d)
            x0 = np.zeros(d)
        else:
            N = null_space(self.A_eq)
            x0, *_ = np.linalg.lstsq(self.A_eq, self.b_eq, rcond=None)
            res = self.A_eq @ x0 - self.b_eq
            scale = max(1.0, float(np.max(np.abs(self.b_eq), initial=0.0)))
            if np.max(np.abs(res), initial=0.0) > 1e-9 * scale:
                raise InfeasibleError("equality rows are inconsistent")
        Ar = self.A @ N
        br = self.b - self.A @ x0
        norms = np.linalg.norm(Ar, axis=1)
        scale = max(1.0, float(np.max(np.abs(self.A), initial=0.0)))
        zero = norms <= 1e-12 * scale
        viol = float(np.max(-br[zero], initial=-np.inf))
        return Reduced(_ro(Ar[~zero]), _ro(br[~zero]), _ro(N), _ro(x0), viol)

    @property
    def dimension(self) -> int:
        """Dimension of the affine hull of the equality rows."""
        return self.reduced.k

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"unknown coordinate {name!r}") from None

    def slack(self, x):
        x = np.asarray(x, dtype=float)
        return self.b - x @ self.A.T

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        scale = max(1.0, float(np.max(np.abs(self.b), initial=0.0)))
        ok = np.all(self.slack(x) >= -tol * scale)
        if self.A_eq.shape[0]:
            ok &= np.all(np.abs(x @ self.A_eq.T - self.b_eq) <= tol * scale)
        return bool(ok)

    def with_rows(self, A2, b2, labels=()):
        A2 = np.atleast_2d(np.asarray(A2, dtype=float))
        return LinearInequalitySystem(
            np.vstack([self.A, A2]), np.concatenate([self.b, np.ravel(b2)]),
            self.A_eq, self.b_eq, self.names,
            self.labels + tuple(labels) if self.labels else (), dict(self.meta))

    def with_equalities(self, Ae, be):
        Ae = np.atleast_2d(np.asarray(Ae, dtype=float))
        return LinearInequalitySystem(
            self.A, self.b, np.vstack([self.A_eq, Ae]),
            np.concatenate([self.b_eq, np.ravel(be)]), self.names, self.labels,
            dict(self.meta))

    def scaled(self, t: float):
        """The dilate ``t * P``."""
        return LinearInequalitySystem(self.A, t * self.b, self.A_eq, t * self.b_eq,
                                      self.names, self.labels, dict(self.meta))

    # ------------------------------------------------------------------ text io
    def to_hrep_text(self) -> str:
        """One row per line: ``ineq|eq c_1 ... c_d rhs`` (rows mean ``a.x <= rhs``)."""
        buf = io.StringIO()
        buf.write(f"# hrep d={self.d} ineq={self.m} eq={self.A_eq.shape[0]}\n")
        for a, r in zip(self.A, self.b):
            buf.write("ineq " + " ".join(repr(float(t)) for t in a) + f" {float(r)!r}\n")
        for a, r in zip(self.A_eq, self.b_eq):
            buf.write("eq " + " ".join(repr(float(t)) for t in a) + f" {float(r)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_hrep_text(cls, text: str):
        ineq, eq = [], []
        d = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line.split():
                    if tok.startswith("d="):
                        d = int(tok[2:])
                continue
            kind, *nums = line.split()
            row = [float(t) for t in nums]
            (ineq if kind == "ineq" else eq).append(row)
            if kind not in ("ineq", "eq"):
                raise DomainError(f"bad row kind {kind!r}")
        if d is None:
            d = len((ineq or eq)[0]) - 1
        A = np.array([r[:-1] for r in ineq]).reshape(-1, d)
        b = np.array([r[-1] for r in ineq])
        Ae = np.array([r[:-1] for r in eq]).reshape(-1, d) if eq else None
        be = np.array([r[-1] for r in eq]) if eq else None
        return cls(A, b, Ae, be)


def condition_on(sys: LinearInequalitySystem, coords, values, slack: float = 0.0):
    """Pin coordinates to ``values`` (equalities) or to ``values +- slack``."""
    idx = [c if isinstance(c, (int, np.integer)) else sys.index(c) for c in coords]
    values = np.broadcast_to(np.asarray(values, dtype=float), (len(idx),))
    if slack < 0:
        raise DomainError("slack must be >= 0")
    E = np.zeros((len(idx), sys.d))
    E[np.arange(len(idx)), idx] = 1.0
    if slack == 0:
        return sys.with_equalities(E, values)
    return sys.with_rows(np.vstack([E, -E]),
                         np.concatenate([values + slack, -(values - slack)]))


def box_system(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    I = np.eye(d)
    return LinearInequalitySystem(np.vstack([I, -I]), np.concatenate([hi, -lo]))


def simplex_system(d: int):
    """``{x >= 0, sum x <= 1}``."""
    return LinearInequalitySystem(np.vstack([-np.eye(d), np.ones((1, d))]),
                                  np.concatenate([np.zeros(d), [1.0]]))
