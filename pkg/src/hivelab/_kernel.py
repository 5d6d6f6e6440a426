"""Polynomial bump kernel on the unit square and its quadrature rule."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DomainError

NORMALIZER = 630.0 ** 2  # 1 / B(5,5)**2


def theta_unit(x, y):
    """Normalized ``x^4 (1-x)^4 y^4 (1-y)^4`` on ``[0,1]^2``, zero outside."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
    val = NORMALIZER * (x * (1 - x)) ** 4 * (y * (1 - y)) ** 4
    return np.where(inside, val, 0.0)


def theta(x, y, eps: float):
    """Scaled kernel ``eps**-2 theta(x/eps, y/eps)`` supported on ``[0,eps]^2``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return theta_unit(np.asarray(x) / eps, np.asarray(y) / eps) / eps ** 2


@lru_cache(maxsize=8)
def kernel_rule(order: int = 32):
    """Tensor Gauss-Legendre nodes ``u`` in ``[0,1]^2`` and kernel-weighted weights.

    ``sum_k w_k g(u_k)`` approximates ``int theta(u) g(u) du``.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    ux, uy = np.meshgrid(t, t, indexing="ij")
    ww = np.outer(w, w) * theta_unit(ux, uy)
    u = np.column_stack([ux.ravel(), uy.ravel()])
    u.setflags(write=False)
    ww = ww.ravel()
    ww.setflags(write=False)
    return u, ww
