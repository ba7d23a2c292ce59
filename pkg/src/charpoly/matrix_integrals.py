"""Closed forms of the matrix integrals behind the eigenvalue representations, with brute-force checks.

Each closed-form evaluator has a companion `*_bruteforce` (or `*_direct`)
routine that computes the defining integral, determinant or group average
numerically without using the closed form. The verification suites compare
the two.

Vandermonde convention: Delta(x) = prod_{i<j} (x_i - x_j).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import LogComplex, MomentEstimate, RngSeed, SpectralPoint
from .ensembles import ContractViolation, sample_haar_batch
from .exact_moments import auto_radius, ray_angle
from .montecarlo import aggregate
from .quadrature import Dim, QuadratureSpec, gauss_hermite_rule, gauss_legendre_rule, integrate_nd, oscillation_nodes

PD_TOL = 0.0


# ----------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class PositiveDefiniteHermitian:
    entries: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.conj().T)) > 1e-12 * scale:
            raise ContractViolation("matrix is not Hermitian")
        a = 0.5 * (a + a.conj().T)
        ev = np.linalg.eigvalsh(a)
        if not ev[0] > PD_TOL:
            raise ContractViolation(f"matrix is not positive definite (smallest eigenvalue {ev[0]:.3g})")
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SignatureMatrix:
    """L = diag(1_n, -1_n)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("block size must be positive")

    @property
    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n), -np.ones(self.n)])

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


def random_positive_definite(n: int, rng: np.random.Generator, eps: float = 0.01) -> PositiveDefiniteHermitian:
    """A^dagger A + eps 1 with A complex Ginibre."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return PositiveDefiniteHermitian(a.conj().T @ a + eps * np.eye(n))


def _hermitian_eigs(Q) -> np.ndarray:
    if isinstance(Q, PositiveDefiniteHermitian):
        return Q.eigenvalues
    a = np.atleast_2d(np.asarray(Q, dtype=complex))
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
        raise ContractViolation("matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def _lfact_prod(lo: int, hi: int) -> float:
    return sum(math.lgamma(j + 1) for j in range(lo, hi + 1))


# ----------------------------------------------------------------------------
# Ingham-Siegel, first type: int_{F>0} dF det F^p e^{-Tr FQ}


def ingham_siegel_first_value(p: int, Q) -> LogComplex:
    """(2 pi)^{n(n-1)/2} p! (p+1)! ... (p+n-1)! det Q^{-(p+n)}.

    Measure: dF = prod_i dF_ii prod_{i<j} dF_ij dF_ij^*, with dz dz^* = 2 dx dy.
    """
    if p < 0 or int(p) != p:
        raise ValueError("p must be a non-negative integer")
    ev = _hermitian_eigs(Q)
    if not ev[0] > 0:
        raise ContractViolation("Q must be positive definite")
    n = len(ev)
    log_v = 0.5 * n * (n - 1) * math.log(2 * math.pi) + _lfact_prod(p, p + n - 1) - (p + n) * float(np.sum(np.log(ev)))
    return LogComplex(log_v, 0.0)


def ingham_siegel_first_bruteforce_n2(p: int, Q, nodes: int = 48):
    """The n=2 defining integral in entrywise coordinates.

    F = [[a, z], [z*, b]] with z = sqrt(ab) s e^{i psi}, 0 <= s < 1, so that
    F > 0 exactly; the measure 2 da db dRe z dIm z becomes 2 a b s da db ds dpsi.
    Tr FQ = a Q11 + b Q22 + 2 Re(z Q21), det F = ab (1 - s^2).
    """
    ev = _hermitian_eigs(Q)
    q = np.asarray(Q.entries if isinstance(Q, PositiveDefiniteHermitian) else Q, dtype=complex)
    if q.shape != (2, 2):
        raise ValueError("n = 2 only")
    # e^{-Tr FQ} <= e^{-lambda_min (a + b)}; cut where that and the polynomial factor are negligible
    R = (60.0 + 2 * (p + 2) * math.log(60.0 + p)) / ev[0]
    q11, q22, q21 = q[0, 0].real, q[1, 1].real, q[1, 0]

    def f(a, b, s, psi):
        z = np.sqrt(a * b) * s * np.exp(1j * psi)
        with np.errstate(divide="ignore"):
            logv = p * (np.log(a * b) + np.log1p(-s * s)) - (a * q11 + b * q22 + 2 * np.real(z * q21))
            return logv + np.log(2 * a * b * s) + 0j

    spec = QuadratureSpec((Dim.finite(0, R, nodes), Dim.finite(0, R, nodes), Dim.finite(0, 1, nodes),
                           Dim.finite(0, 2 * math.pi, nodes)), rtol=1e-6, max_doublings=1, log_integrand=True)
    return integrate_nd(f, spec)


# ----------------------------------------------------------------------------
# Ingham-Siegel, second type: int dF e^{(i/2) Tr FQ} det(F - mu)^{-N}


def ingham_siegel_second_value(N: int, mu: complex, Q, variant: str = "scaled") -> LogComplex:
    """Hermitian second-type integral.

    variant="scaled" (default): i^{n^2} (2 pi)^{n(n+1)/2} / prod_{j=N-n+1}^N Gamma(j)
    x det[(i/2) Q]^{N-n} e^{(i/2) mu Tr Q}; this is the form that matches the
    n=1 residue computation and the oscillatory quadrature. variant="unscaled"
    omits the (i/2)^{n(N-n)} and is kept only for comparison.
    Exactly zero if any eigenvalue of Q is negative.
    """
    mu = complex(mu)
    if not mu.imag > 0:
        raise ValueError("need Im mu > 0")
    ev = _hermitian_eigs(Q)
    n = len(ev)
    if N < n:
        raise ValueError("requires N >= n")
    if np.any(ev < 0):
        return LogComplex.zero()
    log_v = complex(0.5 * n * (n + 1) * math.log(2 * math.pi), 0.5 * math.pi * n * n)
    log_v -= sum(math.lgamma(j) for j in range(N - n + 1, N + 1))
    with np.errstate(divide="ignore"):
        log_v += (N - n) * float(np.sum(np.log(ev)))
    if variant == "scaled":
        log_v += n * (N - n) * complex(-math.log(2.0), 0.5 * math.pi)
    elif variant != "unscaled":
        raise ValueError(f"unknown variant {variant!r}")
    log_v += 0.5j * mu * float(np.sum(ev))
    return LogComplex.from_log(log_v)


def ingham_siegel_second_realsym_value(N: int, mu: complex, Q) -> LogComplex:
    """Real-symmetric second-type integral.

    2^n i^{n(n+1)/2} pi^{n(n+3)/4} / prod_{j=N-(n-1)/2, step 1/2}^{N} Gamma(j)
    x det[(i/2) Q]^{N-(n+1)/2} e^{(i/2) mu Tr Q}; zero if Q has a negative eigenvalue.
    """
    mu = complex(mu)
    if not mu.imag > 0:
        raise ValueError("need Im mu > 0")
    a = np.atleast_2d(np.asarray(Q, dtype=float))
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
        raise ContractViolation("matrix is not real symmetric")
    ev = np.linalg.eigvalsh(0.5 * (a + a.T))
    n = len(ev)
    if N < (n + 1) / 2:
        raise ValueError("requires N >= (n+1)/2")
    if np.any(ev < 0):
        return LogComplex.zero()
    e = N - (n + 1) / 2
    log_v = complex(n * math.log(2.0) + 0.25 * n * (n + 3) * math.log(math.pi), 0.25 * math.pi * n * (n + 1))
    log_v -= sum(math.lgamma(N - 0.5 * k) for k in range(n))
    with np.errstate(divide="ignore"):
        log_v += e * float(np.sum(np.log(ev))) + n * e * complex(-math.log(2.0), 0.5 * math.pi)
    log_v += 0.5j * mu * float(np.sum(ev))
    return LogComplex.from_log(log_v)


def ingham_siegel_residue_n1(N: int, mu: complex, q: float) -> complex:
    """2 pi i (i q/2)^{N-1} e^{i mu q/2} / Gamma(N) for q > 0, and 0 for q < 0."""
    if q < 0:
        return 0j
    return 2j * math.pi * (0.5j * q) ** (N - 1) * np.exp(0.5j * mu * q) / math.gamma(N)


def ingham_siegel_second_bruteforce_n1(N: int, mu: complex, q: float, R: float = 1000.0) -> complex:
    """int_{-R}^{R} df e^{i f q/2} (f - mu)^{-N} by composite Gauss-Legendre on the real line.

    Panels are fine near Re mu, where the integrand peaks, and at most half an
    oscillation period wide elsewhere.
    """
    mu = complex(mu)
    if not mu.imag > 0:
        raise ValueError("need Im mu > 0")
    w = mu.imag
    near = np.arange(mu.real - 40 * w, mu.real + 40 * w + 1e-12, w / 4)
    period = 4 * math.pi / max(abs(q), 1e-3)
    step = min(1.0, period / 2)
    left = np.arange(-R, near[0], step)
    right = np.arange(near[-1], R, step)[1:]
    edges = np.unique(np.clip(np.concatenate([left, near, right, [R]]), -R, R))
    x0, w0 = gauss_legendre_rule(16, -1.0, 1.0)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * x0
    wt = 0.5 * (b - a) * w0
    vals = np.exp(0.5j * x * q) * (x - mu) ** (-N)
    return complex(np.sum(vals * wt))


# ----------------------------------------------------------------------------
# Selberg and the auxiliary Laguerre-type identity


def selberg_value(n: int, t: float) -> float:
    """int_R^n prod dxi Delta^2(xi) e^{-(t/2) sum xi^2} = (2 pi)^{n/2} t^{-n^2/2} prod_{j=1}^n j!."""
    if n < 1 or not t > 0:
        raise ValueError("need n >= 1 and t > 0")
    return math.exp(0.5 * n * math.log(2 * math.pi) - 0.5 * n * n * math.log(t) + _lfact_prod(1, n))


def _vandermonde_sq(xs) -> np.ndarray:
    out = 1.0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out = out * (xs[i] - xs[j]) ** 2
    return out


def selberg_bruteforce(n: int, t: float) -> float:
    """Tensor Gauss-Hermite, exact for the polynomial degree 2(n-1) per variable."""
    x, w = gauss_hermite_rule(n + 2)
    x = x * math.sqrt(2.0 / t)
    w = w * math.sqrt(2.0 / t)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wg = np.prod(np.meshgrid(*([w] * n), indexing="ij"), axis=0)
    return float(np.sum(wg * _vandermonde_sq(grids)))


def aux_identity_value(n: int, p: int, beta: complex) -> LogComplex:
    """int_{q>0} prod dq_i Delta^2(q) prod q_i^p e^{-beta q_i} = beta^{-n(n+p)} prod_1^n j! prod_p^{p+n-1} j!."""
    beta = complex(beta)
    if not beta.real > 0:
        raise ValueError("need Re beta > 0")
    if p < 0 or n < 1:
        raise ValueError("need n >= 1 and p >= 0")
    log_v = -n * (n + p) * np.log(beta) + _lfact_prod(1, n) + _lfact_prod(p, p + n - 1)
    return LogComplex.from_log(complex(log_v))


def aux_identity_bruteforce(n: int, p: int, beta: complex, nodes: int = 80) -> complex:
    """The defining integral on the ray arg q = -arg beta, where the weight is a real exponential."""
    beta = complex(beta)
    th = -np.angle(beta)
    R = (60.0 + 2 * (n + p) * math.log(60.0 + n + p)) / abs(beta)
    dims = tuple(Dim.half_line(R, nodes, angle=th) for _ in range(n))

    def f(*qs):
        out = _vandermonde_sq(qs)
        for q in qs:
            out = out * q ** p * np.exp(-beta * q)
        return out

    return integrate_nd(f, QuadratureSpec(dims, rtol=1e-12, max_doublings=2)).complex


# ----------------------------------------------------------------------------
# HCIZ and Cauchy


def _vandermonde(x) -> float:
    x = np.asarray(x)
    out = 1.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            out *= x[i] - x[j]
    return out


def _check_distinct(x, name: str) -> None:
    x = np.sort(np.asarray(x, dtype=float))
    if len(x) > 1 and np.min(np.diff(x)) < 1e-10:
        raise ValueError(f"coincident entries in {name}")


def hciz_value(lam, q, beta: complex = 1.0) -> complex:
    """int dmu(U) e^{beta Tr U P U^dagger Lambda} over normalised Haar U(n), P = diag(q), Lambda = diag(lam).

    (prod_{j=1}^{n-1} j!) beta^{-n(n-1)/2} det[e^{beta lam_k q_l}] / (Delta(lam) Delta(q)).
    """
    lam = np.asarray(lam, dtype=float)
    q = np.asarray(q, dtype=float)
    if lam.shape != q.shape or lam.ndim != 1:
        raise ValueError("lam and q must be vectors of equal length")
    _check_distinct(lam, "lambda")
    _check_distinct(q, "q")
    n = len(lam)
    beta = complex(beta)
    det = np.linalg.det(np.exp(beta * np.outer(lam, q)))
    const = math.exp(_lfact_prod(1, n - 1)) * beta ** (-n * (n - 1) / 2)
    return complex(const * det / (_vandermonde(lam) * _vandermonde(q)))


def hciz_haar_mc(lam, q, beta: complex, n_samples: int, seed: RngSeed) -> MomentEstimate:
    """Haar Monte Carlo of the HCIZ group average."""
    lam = np.asarray(lam, dtype=float)
    q = np.asarray(q, dtype=float)
    u = sample_haar_batch(len(lam), n_samples, seed)
    # Tr U P U^dagger Lambda = sum_{k,l} lam_k q_l |U_kl|^2
    tr = np.einsum("k,skl,l->s", lam, np.abs(u) ** 2, q)
    return aggregate(np.exp(complex(beta) * tr), "plain_mean")


def cauchy_determinant_value(x, y) -> float:
    """det[1/(x_i - y_j)] = prod_{i<j} (x_i - x_j)(y_j - y_i) / prod_{i,j} (x_i - y_j)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = np.subtract.outer(x, y)
    if np.any(np.abs(diff) < 1e-300):
        raise ValueError("x_i coincides with y_j")
    return float(_vandermonde(x) * _vandermonde(-y) / np.prod(diff))


def cauchy_determinant_direct(x, y) -> float:
    return float(np.linalg.det(1.0 / np.subtract.outer(np.asarray(x, float), np.asarray(y, float))))


# ----------------------------------------------------------------------------
# coset integral over U(n,n) / U(n) x U(n)


def coset_integral_value(sp: SpectralPoint, q1, q2, N: int) -> LogComplex:
    """Integral over the hyperbolic coset, for q1 > 0 > q2 elementwise.

    (2 pi)^n n! (prod_{j<n} j!)^2 N^{-n^2} [-i(mu1 - mu2*)]^{-n^2}
    x e^{i N (mu1 sum q1 + mu2* sum q2)} / prod_{i,j} (q1_i - q2_j).
    Only n = 1 is checked against a direct coset quadrature; the general-n
    constant follows from the Cauchy determinant and HCIZ.
    """
    q1 = np.atleast_1d(np.asarray(q1, dtype=float))
    q2 = np.atleast_1d(np.asarray(q2, dtype=float))
    if q1.shape != q2.shape:
        raise ValueError("q1 and q2 must have equal length")
    if np.any(q1 <= 0) or np.any(q2 >= 0):
        raise ValueError("convergence needs q1 > 0 and q2 < 0 elementwise")
    if not sp.delta > 0:
        raise ValueError("need Im mu1 > 0")
    n = len(q1)
    mu1, mu2s = sp.mu1, sp.mu2_star
    log_v = n * math.log(2 * math.pi) + math.lgamma(n + 1) + 2 * _lfact_prod(1, n - 1) - n * n * math.log(N)
    log_v = log_v - n * n * np.log(-1j * (mu1 - mu2s))
    log_v = log_v + 1j * N * (mu1 * q1.sum() + mu2s * q2.sum())
    log_v = log_v - float(np.sum(np.log(np.subtract.outer(q1, q2))))
    return LogComplex.from_log(complex(log_v))


def coset_integral_bruteforce_n1(sp: SpectralPoint, q1: float, q2: float, N: int,
                                 theta_max: float | None = None, nodes: int = 400) -> complex:
    """n=1 coset integral in (theta, phi) coordinates, measure sinh(2 theta) dtheta dphi.

    The integrand exp(i N [(mu1+mu2*)(q1+q2)/2 + (mu1-mu2*)(q1-q2) cosh(2 theta)/2])
    does not depend on phi, which contributes 2 pi. Im(mu1 - mu2*) = 2 delta > 0
    and q1 - q2 > 0 make it decay like exp(-N delta (q1-q2) cosh 2 theta).
    """
    if not (q1 > 0 > q2):
        raise ValueError("need q1 > 0 > q2")
    mu1, mu2s = sp.mu1, sp.mu2_star
    a = N * sp.delta * (q1 - q2)
    if theta_max is None:
        theta_max = 0.5 * math.acosh(1 + 60.0 / a)
    k = max(nodes, oscillation_nodes(N, abs(mu1 - mu2s) * (q1 - q2) * math.cosh(2 * theta_max), 1.0))

    def f(th):
        return np.sinh(2 * th) * np.exp(1j * N * (0.5 * (mu1 + mu2s) * (q1 + q2)
                                                  + 0.5 * (mu1 - mu2s) * (q1 - q2) * np.cosh(2 * th)))

    res = integrate_nd(f, QuadratureSpec((Dim.finite(0.0, theta_max, k),), rtol=1e-10, max_doublings=3))
    return 2 * math.pi * res.complex


# ----------------------------------------------------------------------------
# spectral structure of Q L


@dataclass(frozen=True)
class QLDecomposition:
    eigenvalues: np.ndarray
    transform: np.ndarray
    signature: tuple
    residual: float


def ql_spectral_decomposition(Q: PositiveDefiniteHermitian, L: SignatureMatrix) -> QLDecomposition:
    """Eigenvalues of Q L (real, n positive and n negative) and T with T^dagger L T = diag(sgn).

    Q L v = lam v gives L v = lam Q^{-1} v, hence v^dagger L v = lam v^dagger Q^{-1} v
    has the sign of lam; eigenvectors are rescaled so that v^dagger L v = sgn(lam).
    """
    if not isinstance(Q, PositiveDefiniteHermitian):
        Q = PositiveDefiniteHermitian(Q)
    if Q.dim != 2 * L.n:
        raise ValueError("Q must have dimension 2n")
    Lm = L.matrix
    lam, vec = np.linalg.eig(Q.entries @ Lm)
    if np.max(np.abs(lam.imag)) > 1e-9 * max(1.0, float(np.max(np.abs(lam)))):
        raise ContractViolation("Q L has a non-real eigenvalue")
    lam = lam.real
    order = np.argsort(-lam)
    lam, vec = lam[order], vec[:, order]
    norms = np.einsum("ij,ik,kj->j", vec.conj(), Lm, vec).real
    T = vec / np.sqrt(np.abs(norms))
    sgn = np.sign(lam)
    resid = float(np.max(np.abs(T.conj().T @ Lm @ T - np.diag(sgn))))
    sig = (int(np.sum(lam > 0)), int(np.sum(lam < 0)))
    return QLDecomposition(lam, T, sig, resid)


def ql_eigenvalues_symmetrised(Q: PositiveDefiniteHermitian, L: SignatureMatrix) -> np.ndarray:
    """Eigenvalues of Q^{1/2} L Q^{1/2}, a Hermitian matrix similar to Q L (descending)."""
    ev, U = np.linalg.eigh(Q.entries)
    root = (U * np.sqrt(ev)) @ U.conj().T
    return np.sort(np.linalg.eigvalsh(root @ L.matrix @ root))[::-1]


# ----------------------------------------------------------------------------
# K2 at n=1 through the hyperbolic Hubbard-Stratonovich route


def hs_route_k2_n1(N: int, sp: SpectralPoint, quad: QuadratureSpec | None = None) -> MomentEstimate:
    """<[Z(mu1) Z(mu2*)]^{-1}> from the two-variable integral left after the coset integration.

    1/((N-1)! (N-2)!) int_{q1,q2>0} (q1 q2)^{N-2} (q1 + q2)
    x e^{i mu1 q1 - i mu2* q2 - (q1^2 + q2^2)/(2N)} / (-i (mu1 - mu2*)).
    The constant is the large-separation normalisation (the Gaussian-free
    limit must give (mu1 mu2*)^{-N}).
    """
    t0 = time.perf_counter()
    if N < 2:
        raise ValueError("requires N >= 2")
    if not sp.delta > 0:
        raise ValueError("need delta > 0")
    mu1, mu2s = sp.mu1, sp.mu2_star
    th = ray_angle(sp.mu)

    def g1(q):
        return (N - 2) * np.log(q) + 1j * mu1 * q - q * q / (2 * N)

    def g2(q):
        return (N - 2) * np.log(q) - 1j * mu2s * q - q * q / (2 * N)

    if quad is None:
        R1 = auto_radius(g1, th)
        R2 = auto_radius(g2, -th)
        k1 = max(200, oscillation_nodes(1, abs(mu1), R1))
        k2 = max(200, oscillation_nodes(1, abs(mu2s), R2))
        quad = QuadratureSpec((Dim.half_line(R1, k1, angle=th), Dim.half_line(R2, k2, angle=-th)),
                              rtol=1e-11, max_doublings=2, log_integrand=True)

    def f(q1, q2):
        with np.errstate(divide="ignore"):
            return g1(q1) + g2(q2) + np.log(q1 + q2)

    res = integrate_nd(f, quad.with_log())
    const = -math.lgamma(N) - math.lgamma(N - 1) - complex(np.log(-1j * (mu1 - mu2s)))
    value = res.value * LogComplex.from_log(const)
    return MomentEstimate(value, 0.0, res.nodes_used, "quadrature", 1000.0 * (time.perf_counter() - t0),
                          res.converged, res.est_rel_error)
