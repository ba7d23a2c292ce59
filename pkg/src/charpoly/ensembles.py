"""GUE, chiral GUE and Haar-unitary samplers, and log-domain characteristic polynomials.

GUE normalisation: density proportional to exp(-(N/2) Tr H^2). Writing
Tr H^2 = sum_i H_ii^2 + 2 sum_{i<j} (Re H_ij^2 + Im H_ij^2) and reading off the
Gaussian factors gives Var(H_ii) = 1/N and Var(Re H_ij) = Var(Im H_ij) = 1/(2N).
The sampler builds H = (A + A^dagger) / (2 sqrt N) from a complex Ginibre A
with standard normal real and imaginary parts, which has exactly those
variances and is Hermitian bit-for-bit.

Chiral block: weight exp(-N Tr J^dagger J), so each of Re J_ij, Im J_ij has
variance 1/(2N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LogComplex, RngSeed, SpectralPoint  # noqa: F401  (re-exported)

HERMITIAN_TOL = 1e-12


class SingularEvaluation(ArithmeticError):
    """mu coincides with an eigenvalue; log|det| would be -inf."""


class ContractViolation(ValueError):
    pass


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
            raise ContractViolation("matrix is not Hermitian")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ChiralBlock:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _check_dim(N: int) -> None:
    if int(N) < 1:
        raise ValueError(f"invalid dimension {N}")


def sample_gue_batch(N: int, count: int, seed: RngSeed, *stream: int) -> np.ndarray:
    """count GUE matrices, shape (count, N, N); stream extends the seed's spawn key."""
    _check_dim(N)
    rng = seed.generator(*stream)
    a = rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))
    return (a + np.conj(np.swapaxes(a, 1, 2))) / (2.0 * math.sqrt(N))


def sample_gue(N: int, seed: RngSeed) -> HermitianMatrix:
    return HermitianMatrix(sample_gue_batch(N, 1, seed)[0])


def sample_chiral_batch(N: int, count: int, seed: RngSeed, *stream: int) -> np.ndarray:
    _check_dim(N)
    rng = seed.generator(*stream)
    z = rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))
    return z / math.sqrt(2.0 * N)


def sample_chiral(N: int, seed: RngSeed) -> ChiralBlock:
    return ChiralBlock(sample_chiral_batch(N, 1, seed)[0])


def sample_haar_batch(n: int, count: int, seed: RngSeed, *stream: int) -> np.ndarray:
    """Haar unitaries via QR of complex Ginibre matrices with R's diagonal made positive."""
    _check_dim(n)
    rng = seed.generator(*stream)
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def sample_haar_unitary(n: int, seed: RngSeed) -> np.ndarray:
    return sample_haar_batch(n, 1, seed)[0]


def hermitian_eigenvalues(H: HermitianMatrix, vectors: bool = False):
    """Ascending eigenvalues (and optionally eigenvectors as columns)."""
    if not isinstance(H, HermitianMatrix):
        H = HermitianMatrix(np.asarray(H))
    if vectors:
        lam, vec = np.linalg.eigh(H.entries)
        return lam, vec
    return np.linalg.eigvalsh(H.entries)


def log_char_poly_from_eigs(eigs: np.ndarray, mu: complex) -> np.ndarray:
    """sum_j log(mu - lambda_j) over the last axis, with per-factor principal logs.

    The imaginary part is the sum of the factor phases, not reduced mod 2 pi.
    """
    return np.sum(np.log(mu - np.asarray(eigs)), axis=-1)


def log_char_poly(H: HermitianMatrix, mu: complex) -> LogComplex:
    """log det(mu - H) as a LogComplex."""
    lam = hermitian_eigenvalues(H)
    diff = complex(mu) - lam
    if np.any(diff == 0):
        raise SingularEvaluation(f"mu={mu} coincides with an eigenvalue")
    w = complex(np.sum(np.log(diff)))
    out = LogComplex.from_log(w)
    im = complex(mu).imag
    if im != 0:
        # |mu - lambda| >= |Im mu| for real lambda
        bound = H.dim * math.log(abs(im))
        if out.log_mag < bound - 1e-9 * max(1.0, abs(bound)):
            raise ContractViolation("eigenvalue-distance bound violated")
    return out
