"""Complex Hermitian linear algebra for density matrices.

Matrices are plain ``numpy`` complex arrays. :class:`DensityMatrix`,
:class:`Spectrum` and :class:`PureState` are thin validated wrappers.

The eigensolver is a cyclic Jacobi method with unitary 2x2 rotations. It is
deterministic (fixed row-by-row sweep order, fixed eigenvector phase) and
accurate to roundoff on the small dense matrices this package handles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import (DimensionMismatch, NoConvergence, NotHermitian,
                     NotPositive, TraceNotOne)

__all__ = [
    "DensityMatrix", "Spectrum", "PureState",
    "as_square", "matrix_from_json", "matrix_to_json",
    "validate_density", "eigh", "projector", "expectation_linear",
    "transition_weights", "density_from_spectrum",
]


# --------------------------------------------------------------------------
# Data types

@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending) and the unitary whose columns are eigenvectors."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


@dataclass(frozen=True)
class DensityMatrix:
    """A validated state: Hermitian, unit trace, positive semidefinite.

    Build one with :func:`validate_density`; the constructor does not check.
    """
    matrix: np.ndarray
    spectrum: Spectrum

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return self.spectrum.eigenvalues


@dataclass(frozen=True)
class PureState:
    """A unit vector representing a ray in Hilbert space."""
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d array")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > TOL.pure_norm:
            raise ValueError(f"state is not normalized: |psi| = {norm:.15g}")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_vector(cls, vector) -> "PureState":
        """Normalize an arbitrary nonzero vector."""
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


# --------------------------------------------------------------------------
# Matrix I/O

def as_square(matrix) -> np.ndarray:
    """Return ``matrix`` as a complex square ndarray, or raise DimensionMismatch."""
    if isinstance(matrix, DensityMatrix):
        return matrix.matrix
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {a.shape}")
    return a


def matrix_from_json(obj: dict) -> np.ndarray:
    """Decode ``{"dim": n, "re": [...], "im": [...]}`` (row-major, n*n each)."""
    try:
        dim = obj["dim"]
        re = obj["re"]
        im = obj.get("im", [0.0] * (dim * dim))
    except (KeyError, TypeError) as exc:
        raise DimensionMismatch(f"malformed matrix object: {exc}") from None
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise DimensionMismatch(f"dim must be a positive integer, got {dim!r}")
    if len(re) != dim * dim or len(im) != dim * dim:
        raise DimensionMismatch(
            f"expected {dim * dim} entries in re and im, got {len(re)} and {len(im)}")
    a = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("matrix entries must be finite")
    return a.reshape(dim, dim)


def matrix_to_json(matrix) -> dict:
    a = as_square(matrix)
    return {
        "dim": int(a.shape[0]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


# --------------------------------------------------------------------------
# Eigensolver

def _hermitian_deviation(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """Unitary G such that (G^H A G) zeroes the (p, q) entry of the 2x2 block.

    The phase of ``apq`` is absorbed first, reducing the block to a real
    symmetric one, then a real Jacobi rotation is applied.
    """
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # diag(1, conj(phase)) @ [[c, s], [-s, c]]
    return np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])


def _fix_phases(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    pivots = V[idx, np.arange(V.shape[1])]
    return V * (pivots.conj() / np.abs(pivots))


def eigh(matrix, *, max_sweeps: int | None = None) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns eigenvalues sorted in descending order and a unitary matrix of
    eigenvectors (columns). Each eigenvector is scaled so that its
    largest-magnitude component (first one on ties) is real and positive.

    Raises
    ------
    NotHermitian
        If ``matrix`` deviates from Hermitian by more than the validation
        tolerance.
    NoConvergence
        If the off-diagonal norm does not fall below tolerance within the sweep
        budget.
    """
    a = as_square(matrix)
    dev = _hermitian_deviation(a)
    if dev > TOL.validation:
        raise NotHermitian(dev)
    A = 0.5 * (a + a.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    target = TOL.jacobi_rel * scale
    sweeps = TOL.jacobi_max_sweeps if max_sweeps is None else max_sweeps

    def off_norm():
        return float(np.linalg.norm(A - np.diag(np.diag(A))))

    converged = n == 1 or scale == 0.0 or off_norm() <= target
    sweep = 0
    while not converged:
        if sweep >= sweeps:
            raise NoConvergence(
                f"Jacobi eigensolver did not converge in {sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                G = _jacobi_rotation(A[p, p].real, A[q, q].real, apq)
                cols = [p, q]
                A[:, cols] = A[:, cols] @ G
                A[cols, :] = G.conj().T @ A[cols, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, cols] = V[:, cols] @ G
        sweep += 1
        converged = off_norm() <= target

    w = np.diag(A).real.copy()
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], _fix_phases(V[:, order]))


# --------------------------------------------------------------------------
# Density matrices

def density_from_spectrum(eigenvalues, eigenvectors=None) -> np.ndarray:
    """Assemble ``V diag(p) V^H`` (identity eigenvectors by default)."""
    p = np.asarray(eigenvalues, dtype=float)
    if eigenvectors is None:
        return np.diag(p).astype(complex)
    V = np.asarray(eigenvectors, dtype=complex)
    return (V * p) @ V.conj().T


def validate_density(matrix, tol: float = TOL.validation) -> DensityMatrix:
    """Check that ``matrix`` is a quantum state and wrap it.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero and the spectrum
    renormalized; the stored matrix is rebuilt from the cleaned spectrum in
    that case.

    Raises
    ------
    NotHermitian, TraceNotOne, NotPositive
    """
    a = as_square(matrix)
    dev = _hermitian_deviation(a)
    if dev > tol:
        raise NotHermitian(dev)
    tr = np.trace(a)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(tr)
    a = 0.5 * (a + a.conj().T)
    spec = eigh(a)
    p = spec.eigenvalues
    if p[-1] < -tol:
        raise NotPositive(p[-1])
    if p[-1] < 0.0:
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        spec = Spectrum(p, spec.eigenvectors)
        a = spec.reconstruct()
    return DensityMatrix(a, spec)


def projector(state: PureState) -> np.ndarray:
    """Rank-one projector ``psi psi^H`` onto a pure state."""
    psi = state.amplitudes
    return np.outer(psi, psi.conj())


def expectation_linear(F, rho) -> float:
    """Trace formula ``tr(rho F)`` for a Hermitian observable ``F``."""
    F = as_square(F)
    r = as_square(rho)
    if F.shape != r.shape:
        raise DimensionMismatch(f"observable is {F.shape}, state is {r.shape}")
    value = np.sum(r * F.T)
    bound = TOL.arithmetic * max(1.0, float(np.max(np.abs(F))))
    if abs(value.imag) > bound:
        raise NotHermitian(abs(value.imag))
    return float(value.real)


def transition_weights(initial: PureState, basis: Spectrum) -> np.ndarray:
    """Probabilities ``|<v_i, psi>|^2`` of landing on each basis vector."""
    if initial.dim != basis.dim:
        raise DimensionMismatch(f"state has dim {initial.dim}, basis has dim {basis.dim}")
    amp = basis.eigenvectors.conj().T @ initial.amplitudes
    return np.abs(amp) ** 2
