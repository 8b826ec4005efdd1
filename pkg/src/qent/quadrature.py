"""Deterministic simplex quadrature for small dimensions.

Integrates ``exp(-lam . t)`` and ``t_i exp(-lam . t)`` over the standard
simplex with adaptive Gauss-Kronrod rules (``scipy.integrate.quad``, nested
for n = 3). It shares no code with the divided-difference kernel and serves as
its ground truth.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ToleranceNotReached

__all__ = ["simplex_quadrature"]

_SMALL = 1.0


def _phi(s: float) -> float:
    """``exp(-s) - 1 + s`` without cancellation."""
    if abs(s) < 1e-2:
        return s * s * (0.5 - s * (1 / 6 - s * (1 / 24 - s * (1 / 120 - s / 720))))
    return math.expm1(-s) + s


def _quad(f, a, b, tol, errors):
    val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=tol, limit=200)
    errors.append((abs(val), err))
    return val


def simplex_quadrature(lam, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """``(ln Z, p)`` for ``n <= 3`` under the unit-volume convention.

    Raises
    ------
    ToleranceNotReached
        If any integration reports a relative error estimate above ``tol``.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    n = lam.size
    if n not in (1, 2, 3):
        raise ValueError(f"simplex quadrature supports n in {{1, 2, 3}}, got {n}")
    if n == 1:
        return float(-lam[0]), np.ones(1)

    if np.all(lam == lam[0]):
        return float(-lam[0]), np.full(n, 1.0 / n)

    # near lam = 0 integrate phi(s) = e^-s - 1 + s >= 0, whose simplex mean
    # differs from Z - 1 by mean(lam); ln Z = log1p(Z - 1) then keeps its
    # relative accuracy. Otherwise shift so exponents stay <= 0.
    small = float(np.max(np.abs(lam))) <= _SMALL
    shift = 0.0 if small else float(lam.min())
    mu = lam - shift
    kernel = _phi if small else (lambda s: math.exp(-s))
    inner_tol = max(tol * 1e-3, 1e-13)
    errors: list = []

    if n == 2:
        def density(a):
            return math.exp(-(mu[0] * a + mu[1] * (1.0 - a)))
        base = _quad(lambda a: kernel(mu[0] * a + mu[1] * (1.0 - a)), 0.0, 1.0, inner_tol, errors)
        moments = [
            _quad(lambda a: a * density(a), 0.0, 1.0, inner_tol, errors),
            _quad(lambda a: (1.0 - a) * density(a), 0.0, 1.0, inner_tol, errors),
        ]
        volume = 1.0
    else:
        def density(a, b):
            return math.exp(-(mu[0] * a + mu[1] * b + mu[2] * (1.0 - a - b)))

        def outer(g):
            def inner(a):
                return _quad(lambda b: g(a, b), 0.0, 1.0 - a, inner_tol, errors)
            return _quad(inner, 0.0, 1.0, inner_tol, errors)

        base = outer(lambda a, b: kernel(mu[0] * a + mu[1] * b + mu[2] * (1.0 - a - b)))
        moments = [outer(lambda a, b: a * density(a, b)),
                   outer(lambda a, b: b * density(a, b)),
                   outer(lambda a, b: (1.0 - a - b) * density(a, b))]
        volume = 2.0   # (n-1)! normalizes the simplex area 1/2 to 1

    worst = max(err / val if val != 0 else (0.0 if err == 0 else math.inf)
                for val, err in ((abs(v), e) for v, e in errors))
    if worst > tol:
        raise ToleranceNotReached(
            f"simplex quadrature error estimate {worst:.2e} exceeds {tol:.1e}")
    p = np.array(moments)
    if small:
        zm1 = volume * base - float(np.mean(lam))
        logZ = math.log1p(zm1)
        p = volume * p / (1.0 + zm1)
    else:
        logZ = math.log(volume * base) - shift
        p = p / base
    return logZ, p
