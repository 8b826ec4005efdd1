"""Monte Carlo oracle over the space of pure states.

Pure states are drawn from the unitarily invariant (Haar / Fubini-Study)
measure by normalizing a vector of independent standard complex Gaussians;
the squared moduli of the amplitudes are then uniform on the simplex.
Canonical expectations use importance weights ``exp(-lam . t)`` on Haar
samples, so every estimator is a (self-normalized) weighted mean.

Randomness comes from numpy's Philox counter-based generator, keyed by
``seed + stream``. Gaussians are produced from its uniform doubles by an
explicit Box-Muller transform, so the whole pipeline is reproducible across
platforms. Samples are processed in fixed-size chunks and per-stream sums are
combined in ascending stream order; results are bit-identical whether or not
streams run in parallel.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dexp import _check_spread, log_partition
from .quadrature import simplex_quadrature
from .spectral import PureState

__all__ = [
    "SamplerConfig", "McEstimate", "stream_generator", "haar_amplitudes",
    "sample_haar", "estimate_logZ", "estimate_density_matrix",
    "estimate_entropy", "estimate_expectation", "estimate_projector_covariance",
    "linear_observable", "simplex_quadrature",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    samples: int
    streams: int = 1
    chunk: int = 1 << 16
    workers: int = 1        # threads; does not affect results

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.samples < 100:
            raise ValueError("need at least 100 samples")
        if self.streams < 1 or self.chunk < 1 or self.workers < 1:
            raise ValueError("streams, chunk and workers must be positive")

    def stream_sizes(self) -> list[int]:
        base, extra = divmod(self.samples, self.streams)
        return [base + (1 if s < extra else 0) for s in range(self.streams)]


@dataclass(frozen=True)
class McEstimate:
    """Sample mean and its standard error.

    For matrix-valued estimates ``mean`` is complex and ``stderr`` carries the
    standard errors of the real and imaginary parts as its real and imaginary
    parts.
    """
    mean: float | np.ndarray
    stderr: float | np.ndarray
    samples: int

    def within(self, target, k: float = 3.0) -> bool | np.ndarray:
        """Whether ``|mean - target| <= k * stderr`` (componentwise).

        A roundoff floor of a few ulps of the target applies where the
        standard error vanishes (e.g. the imaginary diagonal of a projector).
        """
        target = np.asarray(target)
        diff = np.asarray(self.mean) - target
        se = np.asarray(self.stderr)
        floor = 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(target))
        ok = np.abs(diff.real) <= np.maximum(k * se.real, floor)
        if np.iscomplexobj(diff) or np.iscomplexobj(se):
            ok &= np.abs(diff.imag) <= np.maximum(k * se.imag, floor)
        return ok if ok.ndim else bool(ok)


# --------------------------------------------------------------------------
# Sampling

def stream_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``(seed + stream) mod 2**64``."""
    return np.random.Generator(np.random.Philox(key=(int(seed) + int(stream)) & _MASK64))


def haar_amplitudes(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random unit vectors in C^dim, shape ``(count, dim)``.

    Each complex Gaussian takes two uniforms: ``u1`` for the radius, ``u2``
    for the angle.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    u = rng.random((count, dim, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))   # 1 - u in (0, 1]
    z = radius * np.exp(2j * np.pi * u[..., 1])
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_haar(dim: int, rng: np.random.Generator) -> PureState:
    return PureState(haar_amplitudes(dim, 1, rng)[0])


def linear_observable(F):
    """Batch observable ``psi -> <psi|F|psi>`` for a Hermitian matrix ``F``."""
    F = np.asarray(F, dtype=complex)

    def value(psi):
        return np.einsum("si,ij,sj->s", psi.conj(), F, psi).real
    return value


# --------------------------------------------------------------------------
# Weighted accumulation

class _Sums:
    """Running sums for a self-normalized weighted mean of K features.

    Column 0 is the constant feature 1, so the weight totals go through the
    same reduction as the features and a constant observable averages to
    exactly that constant.
    """

    def __init__(self, k: int):
        self.n = 0
        self.wf = np.zeros(k + 1)
        self.w2f = np.zeros(k + 1)
        self.w2f2 = np.zeros(k + 1)

    def add(self, w: np.ndarray, f: np.ndarray) -> None:
        F = np.column_stack([np.ones(w.size), f])
        wF = w[:, None] * F
        self.n += w.size
        self.wf += wF.sum(axis=0)
        self.w2f += (w[:, None] * wF).sum(axis=0)
        self.w2f2 += (wF * wF).sum(axis=0)

    def merge(self, other: "_Sums") -> None:
        self.n += other.n
        self.wf += other.wf
        self.w2f += other.w2f
        self.w2f2 += other.w2f2

    def ratio(self) -> tuple[np.ndarray, np.ndarray]:
        """Weighted means of the features and their delta-method standard errors."""
        w, w2 = self.wf[0], self.w2f[0]
        mu = self.wf[1:] / w
        var = (self.w2f2[1:] - 2.0 * mu * self.w2f[1:] + mu * mu * w2) / w ** 2
        return mu, np.sqrt(np.clip(var, 0.0, None))

    def plain(self) -> tuple[float, float]:
        """Unweighted mean of the single feature and its standard error."""
        N = self.n
        mean = self.wf[1] / N
        var = max(self.w2f2[1] / N - mean * mean, 0.0) * N / (N - 1)
        return float(mean), math.sqrt(var / N)


def _accumulate(config: SamplerConfig, dim: int, kernel, k: int) -> _Sums:
    """Run ``kernel(psi) -> (weights, features)`` over all samples.

    Chunking and stream order are fixed by ``config`` so the reduction is
    deterministic.
    """
    def run_stream(stream: int, size: int) -> _Sums:
        rng = stream_generator(config.seed, stream)
        sums = _Sums(k)
        done = 0
        while done < size:
            c = min(config.chunk, size - done)
            psi = haar_amplitudes(dim, c, rng)
            w, f = kernel(psi)
            sums.add(w, f)
            done += c
        return sums

    sizes = config.stream_sizes()
    if config.workers > 1 and config.streams > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(run_stream, range(config.streams), sizes))
    else:
        parts = [run_stream(s, n) for s, n in enumerate(sizes)]
    total = parts[0]
    for part in parts[1:]:
        total.merge(part)
    return total


def _prepare(lam):
    lam = np.asarray(lam, dtype=float).ravel()
    _check_spread(lam)
    return lam, float(lam.min())


def _coordinates(psi, basis):
    if basis is None:
        return np.abs(psi) ** 2
    return np.abs(psi @ basis.conj()) ** 2    # |<b_i, psi>|^2


# --------------------------------------------------------------------------
# Estimators

def estimate_logZ(lam, config: SamplerConfig) -> McEstimate:
    """``ln`` of the Haar average of ``exp(-lam . t)``."""
    lam, shift = _prepare(lam)
    n = lam.size

    def kernel(psi):
        t = np.abs(psi) ** 2
        w = np.exp(-(t @ (lam - shift)))
        return np.ones_like(w), w[:, None]

    sums = _accumulate(config, n, kernel, 1)
    zbar, se = sums.plain()
    return McEstimate(math.log(zbar) - shift, se / zbar, sums.n)


def estimate_density_matrix(lam, config: SamplerConfig, basis=None) -> McEstimate:
    """Canonical first moment of the projector ``psi psi^H``.

    ``lam`` holds the multiplier eigenvalues in ``basis`` (columns; identity if
    omitted). The result is expressed in the computational basis.
    """
    lam, shift = _prepare(lam)
    n = lam.size
    B = None if basis is None else np.asarray(basis, dtype=complex)

    def kernel(psi):
        t = _coordinates(psi, B)
        w = np.exp(-(t @ (lam - shift)))
        P = (psi[:, :, None] * psi[:, None, :].conj()).reshape(psi.shape[0], n * n)
        return w, np.concatenate([P.real, P.imag], axis=1)

    sums = _accumulate(config, n, kernel, 2 * n * n)
    mu, se = sums.ratio()
    mean = (mu[: n * n] + 1j * mu[n * n:]).reshape(n, n)
    stderr = (se[: n * n] + 1j * se[n * n:]).reshape(n, n)
    return McEstimate(mean, stderr, sums.n)


def estimate_entropy(lam, config: SamplerConfig) -> McEstimate:
    """Haar average of ``-w ln w`` with ``w = exp(-lam . t) / Z`` (analytic Z)."""
    lam, _ = _prepare(lam)
    logZ = log_partition(lam)

    def kernel(psi):
        log_w = -(np.abs(psi) ** 2 @ lam) - logZ
        h = -np.exp(log_w) * log_w
        return np.ones_like(h), h[:, None]

    sums = _accumulate(config, lam.size, kernel, 1)
    mean, se = sums.plain()
    return McEstimate(mean, se, sums.n)


def estimate_expectation(F, lam, config: SamplerConfig) -> McEstimate:
    """Canonical expectation of a real observable on pure states.

    ``F`` is called with a ``(count, dim)`` array of unit vectors and must
    return ``count`` real values; it may be nonlinear in the projector.
    """
    lam, shift = _prepare(lam)

    def kernel(psi):
        t = np.abs(psi) ** 2
        w = np.exp(-(t @ (lam - shift)))
        return w, np.asarray(F(psi), dtype=float).reshape(-1, 1)

    sums = _accumulate(config, lam.size, kernel, 1)
    mu, se = sums.ratio()
    return McEstimate(float(mu[0]), float(se[0]), sums.n)


def estimate_projector_covariance(lam, config: SamplerConfig) -> McEstimate:
    """Canonical covariance of the simplex coordinates ``t_i = |psi_i|^2``.

    Two passes over the same samples: the first fixes the mean, the second
    averages centered products.
    """
    lam, shift = _prepare(lam)
    n = lam.size

    def first(psi):
        t = np.abs(psi) ** 2
        return np.exp(-(t @ (lam - shift))), t

    mean_t, _ = _accumulate(config, n, first, n).ratio()

    def second(psi):
        t = np.abs(psi) ** 2
        d = t - mean_t
        return np.exp(-(t @ (lam - shift))), (d[:, :, None] * d[:, None, :]).reshape(-1, n * n)

    sums = _accumulate(config, n, second, n * n)
    mu, se = sums.ratio()
    return McEstimate(mu.reshape(n, n), se.reshape(n, n), sums.n)
