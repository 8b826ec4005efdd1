"""Divided differences of ``exp`` and the canonical generating function.

For simplex coordinates ``t`` (``t_i >= 0``, ``sum t = 1``) the normalized
generating function is

    Z(lam) = (n-1)! * integral_simplex exp(-lam . t) dt = (n-1)! * exp[-lam_1, ..., -lam_n]

where ``exp[...]`` is the divided difference of the exponential (Hermite-Genocchi).
Derivatives of ``ln Z`` are ratios of divided differences with repeated nodes,
so the moment map and the Hessian come out of the same kernel.

Divided differences are read off the first row of ``expm(B)`` for the upper
bidiagonal matrix ``B`` with the nodes on the diagonal (Opitz). The exponential
is evaluated by scaling and squaring a Taylor polynomial; every entry of the
result is positive, so squaring loses no relative accuracy. Nodes are shifted
by their mean when the spread is moderate, which avoids cancelling a large
shift against ``ln Z`` for trace-free multipliers, and by their maximum
otherwise so that no exponent can overflow. The raw value ``dd_exp`` keeps the
overflow guard on the node spread; the log-domain functions accept far larger
spreads, which the dual solver needs for nearly pure spectra (the smallest
weight decays only like 1/spread).
"""
from __future__ import annotations

import math

import numpy as np

from .config import TOL
from .errors import SpreadTooLarge

__all__ = [
    "dd_exp", "log_dd_exp", "dd_exp_table", "log_partition", "moment_map",
    "second_moments", "hessian_logZ", "canonical_moments",
]

_UNIT_ROUNDOFF = 2.0 ** -53
_SCALED_NORM = 0.5
_MEAN_SHIFT_LIMIT = 300.0   # largest node after a mean shift


def _tail_order() -> int:
    # smallest q with e^{1/2} (1/2)^(q+1) / (q+1)! below unit roundoff
    q = 1
    while math.exp(_SCALED_NORM) * _SCALED_NORM ** (q + 1) / math.factorial(q + 1) > _UNIT_ROUNDOFF:
        q += 1
    return q


_TAIL = _tail_order()


def _check_spread(nodes: np.ndarray, limit: float = TOL.max_spread) -> None:
    if not np.all(np.isfinite(nodes)):
        raise ValueError("divided-difference nodes must be finite")
    spread = float(nodes.max() - nodes.min())
    if spread > limit:
        raise SpreadTooLarge(spread, limit)


def _superdiag(m: int) -> float:
    # off-diagonal weight sigma with sigma^(m-1) ~ (m-1)!; keeps entries away
    # from underflow for long node lists, exact power of two
    if m <= 2:
        return 1.0
    return 2.0 ** round(math.lgamma(m) / (m - 1) / math.log(2.0))


# x87 extended precision where available; plain double elsewhere
_WIDE = np.longdouble if np.finfo(np.longdouble).eps < 1e-18 else np.float64


def dd_exp_table(centered: np.ndarray, normalized: bool = False, dtype=np.float64) -> np.ndarray:
    """First rows of ``expm`` of a batch of bidiagonal node matrices.

    Parameters
    ----------
    centered : (B, m) array
        Node lists, shifted so that no node is large and positive.
    normalized : bool
        Return ``j! exp[x_b0, ..., x_bj]`` instead; these stay near 1 for
        small spreads and do not underflow for long node lists.
    dtype : numpy float type
        Working precision of the Taylor and squaring steps.

    Returns
    -------
    (B, m) array ``T`` with ``T[b, j] = exp[x_b0, ..., x_bj]``.
    """
    x = np.atleast_2d(np.asarray(centered, dtype=dtype))
    B, m = x.shape
    if m == 1:
        return np.exp(x)
    sigma = _superdiag(m)
    norm = float(np.max(np.abs(x))) + sigma
    k = max(0, math.ceil(math.log2(norm / _SCALED_NORM)))
    s = 2.0 ** -k

    X = np.zeros((B, m, m), dtype=dtype)
    idx = np.arange(m)
    X[:, idx, idx] = x * s
    X[:, idx[:-1], idx[1:]] = sigma * s

    eye = np.eye(m, dtype=dtype)
    T = np.broadcast_to(eye, (B, m, m)).copy()
    for j in range(m - 1 + _TAIL, 0, -1):
        T = eye + (X @ T) / j
    for _ in range(k):
        T = T @ T

    row = T[:, 0, :]
    if normalized:
        # j! / sigma^j is close to 1 by the choice of sigma; sigma is a power of two
        scale = np.array([dtype(math.factorial(j)) / dtype(sigma) ** j for j in range(m)])
        return row * scale
    return row / dtype(sigma) ** np.arange(m)


def log_dd_exp(nodes) -> float:
    """Natural log of the divided difference of exp over ``nodes``."""
    x = np.asarray(nodes, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("node list must be nonempty")
    _check_spread(x, TOL.max_log_spread)
    m = x.size
    if np.all(x == x[0]):
        return float(x[0]) - math.lgamma(m)
    top = float(x.max())
    return top + math.log(dd_exp_table((x - top)[None, :], normalized=True)[0, -1]) - math.lgamma(m)


def dd_exp(nodes) -> float:
    """Divided difference ``exp[nodes]`` (confluent nodes allowed).

    >>> round(dd_exp([1.0, -1.0]), 12) == round(math.sinh(1.0), 12)
    True
    """
    x = np.asarray(nodes, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("node list must be nonempty")
    _check_spread(x)
    if np.all(x == x[0]):
        return math.exp(x[0]) / math.factorial(x.size - 1)
    return math.exp(log_dd_exp(x))


# --------------------------------------------------------------------------
# Generating function and its derivatives

def _prepare(lam) -> tuple[np.ndarray, float]:
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("multiplier must have at least one eigenvalue")
    x = -lam
    _check_spread(x, TOL.max_log_spread)
    shift = float(np.mean(x))
    if float(x.max()) - shift > _MEAN_SHIFT_LIMIT:
        shift = float(x.max())
    return x - shift, shift


def log_partition(lam) -> float:
    """``ln Z(lam)`` under the unit-volume convention (``Z(0) = 1``).

    Evaluated in extended precision when the platform has it, so the result
    is close to correctly rounded and finite differences of it stay smooth.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("multiplier must have at least one eigenvalue")
    x = -lam.astype(_WIDE)
    _check_spread(lam, TOL.max_log_spread)
    if np.all(x == x[0]):
        return float(x[0])
    shift = np.mean(x)
    if x.max() - shift > _MEAN_SHIFT_LIMIT:
        shift = x.max()
    norm = dd_exp_table((x - shift)[None, :], normalized=True, dtype=_WIDE)[0, -1]
    return float(shift + np.log(norm))


def canonical_moments(lam, order: int = 2):
    """``(ln Z, p, M)`` from a single batched exponential.

    ``p`` is the moment map ``-grad ln Z`` (mean of the simplex coordinates
    under the canonical density) and ``M`` the matrix of second moments
    ``E[t_i t_j]``. With ``order=1`` only ``(ln Z, p)`` is returned.
    """
    x, shift = _prepare(lam)
    n = x.size
    if np.all(x == x[0]):
        # uniform-simplex moments, exact
        p = np.full(n, 1.0 / n)
        M = (np.ones((n, n)) + np.eye(n)) / (n * (n + 1))
        logZ = shift + float(x[0])
        return (logZ, p) if order == 1 else (logZ, p, M)
    if order == 1:
        rows = np.concatenate([np.broadcast_to(x, (n, n)), x[:, None]], axis=1)
        T = dd_exp_table(rows, normalized=True)
        base = T[0, n - 1]
        p = T[:, n] / (n * base)
        return shift + math.log(base), p

    iu, ju = np.triu_indices(n)
    rows = np.concatenate(
        [np.broadcast_to(x, (iu.size, n)), x[iu, None], x[ju, None]], axis=1)
    T = dd_exp_table(rows, normalized=True)
    base = T[0, n - 1]
    # rows with iu == i carry n! exp[x, x_i] in column n
    first = np.searchsorted(iu, np.arange(n))
    p = T[first, n] / (n * base)
    M = np.empty((n, n))
    vals = T[:, n + 1] / (n * (n + 1) * base) * np.where(iu == ju, 2.0, 1.0)
    M[iu, ju] = vals
    M[ju, iu] = vals
    return shift + math.log(base), p, M


def moment_map(lam) -> np.ndarray:
    """Probabilities ``p_i = -d ln Z / d lam_i``."""
    return canonical_moments(lam, order=1)[1]


def second_moments(lam) -> np.ndarray:
    """``E[t_i t_j]`` under the canonical distribution."""
    return canonical_moments(lam)[2]


def hessian_logZ(lam) -> np.ndarray:
    """Hessian of ``ln Z``: covariance matrix of the simplex coordinates.

    Positive semidefinite, with the all-ones vector as its null direction.
    """
    _, p, M = canonical_moments(lam)
    H = M - np.outer(p, p)
    return 0.5 * (H + H.T)
