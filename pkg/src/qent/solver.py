"""Convex dual of the maximum-entropy problem.

Given a spectrum ``p`` we minimize ``g(lam) = lam . p + ln Z(lam)`` on the
hyperplane ``sum(lam) = 0``. ``ln Z`` is convex and its gradient is ``-p(lam)``,
so the minimizer is the multiplier whose canonical density reproduces ``p``,
and the minimum value is the entropy of that density.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .dexp import canonical_moments, log_partition
from .errors import MaxIterationsExceeded, NearPure, NotNormalized

__all__ = ["SolveReport", "solve_lambda", "entropy_dual", "trace_free_basis"]

log = logging.getLogger(__name__)

_ARMIJO_SLOPE = 1e-4
_BACKTRACK = 0.5
_RIDGE = 1e-14


@dataclass(frozen=True)
class SolveReport:
    multiplier: np.ndarray      # gauge-fixed, sums to zero
    entropy: float
    log_partition: float
    gradient_norm: float        # max |p - p(lam)|
    iterations: int
    converged: bool
    objective: tuple = field(default=(), repr=False)  # g after each accepted step


def trace_free_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n x (n-1)) of vectors orthogonal to all-ones."""
    ones = np.ones((n, 1)) / np.sqrt(n)
    Q, _ = np.linalg.qr(np.hstack([ones, np.eye(n)[:, : n - 1]]))
    return Q[:, 1:]


def _check_probabilities(p, eps_min):
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be a nonempty finite list")
    total = p.sum()
    if abs(total - 1.0) > TOL.validation:
        raise NotNormalized(total)
    if p.min() < eps_min:
        raise NearPure(p.min(), eps_min)
    return p


def solve_lambda(p, tol: float = 1e-10, max_iter: int = 100, *,
                 eps_min: float = TOL.eps_min, strict: bool = False) -> SolveReport:
    """Find the trace-free multiplier whose moment map equals ``p``.

    Damped Newton on the trace-free subspace with Armijo backtracking,
    starting at ``lam = 0``. Converged when ``max|p - p(lam)| <= tol``.

    Raises
    ------
    NotNormalized
        ``p`` does not sum to one.
    NearPure
        Some ``p_i < eps_min``; the multiplier diverges.
    MaxIterationsExceeded
        Only when ``strict``; otherwise the best iterate comes back with
        ``converged=False``.
    """
    p = _check_probabilities(p, eps_min)
    n = p.size
    lam = np.zeros(n)
    if n == 1:
        return SolveReport(lam, 0.0, 0.0, 0.0, 0, True, (0.0,))

    Q = trace_free_basis(n)
    logZ, m, M = canonical_moments(lam)
    g = float(lam @ p + logZ)
    r = p - m
    history = [g]
    it = 0
    while np.max(np.abs(r)) > tol and it < max_iter:
        H = M - np.outer(m, m)
        Hr = Q.T @ H @ Q + _RIDGE * np.eye(n - 1)
        delta = Q @ np.linalg.solve(Hr, Q.T @ r)
        slope = float(r @ delta)   # -(directional derivative) along -delta

        noise = 64 * np.finfo(float).eps * max(1.0, abs(g))
        trial = None
        t = 1.0
        while _ARMIJO_SLOPE * t * slope > noise:
            candidate = lam - t * delta
            candidate -= candidate.mean()
            if float(candidate @ p + log_partition(candidate)) <= g - _ARMIJO_SLOPE * t * slope:
                trial = candidate
                break
            t *= _BACKTRACK
        if trial is None:
            # required decrease is below roundoff in g; judge the full step by the gradient
            candidate = lam - delta
            candidate -= candidate.mean()
            r_trial = p - canonical_moments(candidate, order=1)[1]
            if np.max(np.abs(r_trial)) >= np.max(np.abs(r)):
                log.debug("Newton step stalled at gradient %.3e", np.max(np.abs(r)))
                break
            trial = candidate

        lam = trial
        logZ, m, M = canonical_moments(lam)
        g = float(lam @ p + logZ)
        r = p - m
        history.append(g)
        it += 1

    grad = float(np.max(np.abs(r)))
    report = SolveReport(lam, g, float(logZ), grad, it, grad <= tol, tuple(history))
    if not report.converged:
        log.warning("dual solve did not converge: %d iterations, gradient %.3e", it, grad)
        if strict:
            raise MaxIterationsExceeded(report)
    return report


def entropy_dual(p, **kwargs) -> float:
    """Entropy ``lam . p + ln Z(lam)`` at the solved multiplier."""
    return solve_lambda(p, **kwargs).entropy
