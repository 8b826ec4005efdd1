"""Entropies of quantum states.

``quantum_shannon`` is the Shannon entropy of the least-informative density on
the space of pure states compatible with a given density matrix. It depends
only on the spectrum. Values use the unit-volume convention (the maximally
mixed state has entropy 0); ``offset`` adds the constant of any other volume
normalization. Only derivatives and differences between states are
convention free.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import TOL
from .dexp import hessian_logZ
from .errors import NearPure
from .solver import solve_lambda
from .spectral import (DensityMatrix, PureState, as_square, eigh,
                       transition_weights, validate_density)

__all__ = [
    "EntropyReport", "SweepRow", "SWEEP_HEADER",
    "von_neumann", "shannon", "smooth", "quantum_shannon", "fisher_rao",
    "two_state_rho1", "two_state_rho1_derivative", "two_state_log_partition",
    "two_state_entropy", "sweep_two_state", "sweep_to_csv",
    "sweep_finite_difference_error", "measurement_ensemble",
    "random_density_matrix", "concavity_slack",
]

SMOOTH_HINT = "retry with smoothing rho -> (1-eps) rho + eps I/n, e.g. --smooth 1e-6"


@dataclass(frozen=True)
class EntropyReport:
    spectrum: np.ndarray
    s_von_neumann: float
    s_rho: float                # unit-volume convention
    difference: float           # s_rho + volume_offset - s_von_neumann
    multiplier: np.ndarray
    volume_offset: float = 0.0
    iterations: int = 0
    gradient_norm: float = 0.0

    @property
    def s_rho_total(self) -> float:
        """``s_rho`` with the volume offset applied."""
        return self.s_rho + self.volume_offset


def _density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else validate_density(rho)


def shannon(p) -> float:
    """``-sum p ln p`` with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def von_neumann(rho) -> float:
    """Von Neumann entropy ``-tr(rho ln rho)``, via the spectrum."""
    return shannon(_density(rho).probabilities)


def smooth(rho, eps: float) -> np.ndarray:
    """Mix ``rho`` with the maximally mixed state: ``(1-eps) rho + eps I/n``."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"smoothing weight must lie in [0, 1), got {eps}")
    a = as_square(rho)
    n = a.shape[0]
    return (1.0 - eps) * a + eps * np.eye(n) / n


def quantum_shannon(rho, offset: float = 0.0, *, smooth_eps: float | None = None,
                    tol: float = 1e-10) -> EntropyReport:
    """Solve the max-entropy dual for ``rho`` and collect both entropies.

    Raises
    ------
    NearPure
        If an eigenvalue of ``rho`` is below the solver floor and no smoothing
        was requested.
    """
    if smooth_eps:
        rho = smooth(as_square(rho), smooth_eps)
    dm = _density(rho)
    p = dm.probabilities
    try:
        sol = solve_lambda(p, tol=tol)
    except NearPure as exc:
        raise NearPure(exc.smallest, exc.floor, SMOOTH_HINT) from None
    s_vn = shannon(p)
    return EntropyReport(
        spectrum=p,
        s_von_neumann=s_vn,
        s_rho=sol.entropy,
        difference=sol.entropy + offset - s_vn,
        multiplier=sol.multiplier,
        volume_offset=float(offset),
        iterations=sol.iterations,
        gradient_norm=sol.gradient_norm,
    )


def fisher_rao(rho) -> np.ndarray:
    """Fisher-Rao metric (Hessian of ``ln Z``) at the solved multiplier.

    Indexed by the eigenvalue ordering of the spectrum (descending).
    """
    dm = _density(rho)
    try:
        sol = solve_lambda(dm.probabilities)
    except NearPure as exc:
        raise NearPure(exc.smallest, exc.floor, SMOOTH_HINT) from None
    return hessian_logZ(sol.multiplier)


# --------------------------------------------------------------------------
# Two-state closed forms

# 1/x - 1/(e^x - 1) = 1/2 - sum_k B_2k x^(2k-1) / (2k)!; ten terms reach
# roundoff for |x| < 1, where the closed forms lose digits to cancellation
_SERIES_RADIUS = 1.0
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
              Fraction(43867, 798), Fraction(-174611, 330)]
_ODD_COEFFS = [float(b / math.factorial(2 * k + 2)) for k, b in enumerate(_BERNOULLI)]


def two_state_rho1(delta: float) -> float:
    """Weight of level 1 for multiplier gap ``delta = lam1 - lam2``."""
    if abs(delta) < _SERIES_RADIUS:
        d2 = delta * delta
        acc = 0.0
        for c in reversed(_ODD_COEFFS):
            acc = acc * d2 + c
        return 0.5 - delta * acc
    return 1.0 / delta - 1.0 / math.expm1(delta)


def two_state_rho1_derivative(delta: float) -> float:
    """d rho1 / d delta; even in ``delta`` and always negative."""
    if abs(delta) < _SERIES_RADIUS:
        d2 = delta * delta
        acc = 0.0
        for k in reversed(range(len(_ODD_COEFFS))):
            acc = acc * d2 + (2 * k + 1) * _ODD_COEFFS[k]
        return -acc
    sh = math.sinh(0.5 * delta) if abs(delta) < 1400 else math.inf
    return -1.0 / delta ** 2 + 0.25 / sh ** 2


def two_state_log_partition(lam: float) -> float:
    """``ln Z`` at multiplier ``(-lam, lam)``: ``ln(sinh(lam)/lam)``."""
    a = abs(lam)
    if a < 1e-4:
        return a * a / 6.0
    return a + math.log1p(-math.exp(-2.0 * a)) - math.log(2.0 * a)


def two_state_entropy(lam: float) -> tuple[float, float]:
    """``(s_rho, s_vn)`` for the two-level state with multiplier ``(-lam, lam)``."""
    if abs(lam) > TOL.max_spread / 2:
        raise ValueError(f"|lambda| must not exceed {TOL.max_spread / 2:g}")
    p1 = two_state_rho1(-2.0 * lam)
    p2 = two_state_rho1(2.0 * lam)
    s_rho = lam * (p2 - p1) + two_state_log_partition(lam)
    return s_rho, shannon([p1, p2])


@dataclass(frozen=True)
class SweepRow:
    lam: float
    p1: float
    s_rho: float
    s_vn: float
    ds_rho: float
    ds_vn: float


SWEEP_HEADER = ("lambda", "p1", "s_rho", "s_vn", "ds_rho", "ds_vn")


def _sweep_point(lam: float, offset: float) -> SweepRow:
    p1 = two_state_rho1(-2.0 * lam)
    p2 = two_state_rho1(2.0 * lam)
    s_rho, s_vn = two_state_entropy(lam)
    # dp1/dlam; dp2 = -dp1
    dp1 = -2.0 * two_state_rho1_derivative(-2.0 * lam)
    # envelope: dS_rho/dlam = sum lam_i dp_i with lam_1 = -lam, lam_2 = lam
    ds_rho = -2.0 * lam * dp1
    ds_vn = -(math.log(p1) - math.log(p2)) * dp1
    return SweepRow(lam, p1, s_rho + offset, s_vn, ds_rho, ds_vn)


def sweep_two_state(lambda_min: float = -10.0, lambda_max: float = 10.0,
                    step: float = 0.05, offset: float = 0.0) -> list[SweepRow]:
    """Entropies and their analytic lambda-derivatives on a grid."""
    if not (math.isfinite(lambda_min) and math.isfinite(lambda_max) and math.isfinite(step)):
        raise ValueError("sweep range and step must be finite")
    if step <= 0 or lambda_max < lambda_min:
        raise ValueError("need step > 0 and lambda_min <= lambda_max")
    count = int(math.floor((lambda_max - lambda_min) / step + 1e-9)) + 1
    rows = []
    for k in range(count):
        lam = lambda_min + k * step
        if abs(lam) < 1e-9 * step:
            lam = 0.0
        rows.append(_sweep_point(lam, offset))
    return rows


def sweep_finite_difference_error(rows: list[SweepRow], h: float = 1e-4) -> float:
    """Largest gap between analytic and central-difference derivatives."""
    worst = 0.0
    for row in rows[1:-1]:
        hi = two_state_entropy(row.lam + h)
        lo = two_state_entropy(row.lam - h)
        worst = max(worst,
                    abs((hi[0] - lo[0]) / (2 * h) - row.ds_rho),
                    abs((hi[1] - lo[1]) / (2 * h) - row.ds_vn))
    return worst


def sweep_to_csv(rows: list[SweepRow]) -> str:
    lines = [",".join(SWEEP_HEADER)]
    for r in rows:
        lines.append(",".join(f"{v + 0.0:.12g}" for v in (r.lam, r.p1, r.s_rho, r.s_vn, r.ds_rho, r.ds_vn)))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Measurement ensembles and mixtures

def measurement_ensemble(initial: PureState, observable) -> tuple[np.ndarray, float]:
    """Outcome weights of measuring ``observable`` and their Shannon entropy."""
    spec = eigh(observable)
    gaps = -np.diff(spec.eigenvalues)
    if gaps.size and gaps.min() <= TOL.validation * max(1.0, float(np.max(np.abs(spec.eigenvalues)))):
        warnings.warn("observable has a degenerate spectrum; eigenstates are not unique",
                      RuntimeWarning, stacklevel=2)
    w = transition_weights(initial, spec)
    return w, shannon(w)


def random_density_matrix(dim: int, rng: np.random.Generator, floor: float = 0.05) -> np.ndarray:
    """Full-rank random state: normalized Ginibre ``G G^H`` mixed with ``I/n``.

    ``floor`` is the weight of the maximally mixed component; it keeps every
    eigenvalue above ``floor / dim``.
    """
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    W = G @ G.conj().T
    W /= np.trace(W).real
    return (1.0 - floor) * W + floor * np.eye(dim) / dim


def concavity_slack(states, weights) -> float:
    """``S(sum w rho) - sum w S(rho)``; nonnegative when concavity holds."""
    w = np.asarray(weights, dtype=float)
    mixture = sum(wi * as_square(r) for wi, r in zip(w, states))
    mixture = 0.5 * (mixture + mixture.conj().T)
    mixture /= np.trace(mixture).real
    lhs = quantum_shannon(mixture).s_rho
    rhs = sum(wi * quantum_shannon(r).s_rho for wi, r in zip(w, states))
    return float(lhs - rhs)
