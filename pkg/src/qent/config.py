"""Global numerical tolerances.

Every finite-precision contract in the package reads from ``TOL`` so the
thresholds live in one place.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    validation: float = 1e-10   # hermiticity, trace, positivity of input states
    arithmetic: float = 1e-12   # discarded imaginary residues, probability sums
    pure_norm: float = 1e-12    # |psi| = 1
    eps_min: float = 1e-6       # smallest eigenvalue the dual solver accepts
    jacobi_rel: float = 1e-13   # off-diagonal Frobenius norm / matrix norm
    jacobi_max_sweeps: int = 100
    max_spread: float = 700.0   # exp overflow guard on raw divided differences
    max_log_spread: float = 1e8  # node spread accepted by the log-domain kernel


TOL = Tolerances()
