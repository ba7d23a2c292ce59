"""Large-N saddle-point formulas, evaluated as complex logarithms.

Conventions shared by every evaluator here:
  * mu1 - mu2* = omega + 2 i delta, so wherever omega multiplies N it is taken
    as omega + 2 i delta (the regulator enters the exponent the same way).
  * rho(mu) = sqrt(4 - mu^2) / (2 pi), the semicircle density.
  * Only the bulk |mu| < 2 is supported; the edge raises ValueError.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import LogComplex, MomentEstimate, SpectralPoint
from .quadrature import Dim, QuadratureSpec, integrate_nd
from .specfun import log_bessel_i, log_bessel_k


def semicircle_density(mu):
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu_arr) > 2):
        raise ValueError("semicircle density is supported on |mu| <= 2")
    out = np.sqrt(np.clip(4.0 - mu_arr ** 2, 0.0, None)) / (2 * np.pi)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(x):
    t = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = 0.5 + t * np.sqrt(4.0 - t * t) / (4 * np.pi) + np.arcsin(t / 2) / np.pi
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SaddlePair:
    q_plus: complex
    q_minus: complex

    def __post_init__(self):
        if abs(self.q_plus * self.q_minus + 1) > 1e-12:
            raise ValueError("saddle points must satisfy q+ q- = -1")


def _check_bulk(mu: float) -> None:
    if not abs(mu) < 2:
        raise ValueError(f"|mu| = {abs(mu)} is outside the bulk |mu| < 2")


def saddle_points(mu: float) -> SaddlePair:
    """Roots of q - i mu - 1/q = 0."""
    _check_bulk(mu)
    s = math.sqrt(4.0 - mu * mu)
    return SaddlePair(complex(s, mu) / 2, complex(-s, mu) / 2)


def _sum_lfact(lo: int, hi: int) -> float:
    return sum(math.lgamma(j + 1) for j in range(lo, hi + 1))


def _check(N: int, n: int, sp: SpectralPoint) -> None:
    if N < n or n < 1:
        raise ValueError("requires N >= n >= 1")
    _check_bulk(sp.mu)


def _estimate(log_value: complex, t0: float) -> MomentEstimate:
    return MomentEstimate(LogComplex.from_log(log_value), 0.0, 0, "asymptotic",
                          runtime_ms=1000.0 * (time.perf_counter() - t0))


def _log_k1(N: int, n: int, mu: float, omega_eff: complex) -> complex:
    s = math.sqrt(4.0 - mu * mu)
    log_qp = 1j * math.asin(mu / 2)  # |q+| = 1
    out = N * n * complex(math.log(N), -math.pi / 2) - 0.5 * n * n * math.log(N)
    out += 0.5 * n * math.log(2 * math.pi) - _sum_lfact(N - n, N - 1)
    # q+ power Nn - n^2/2; with Nn + n^2/2 the phase is off by n^2 arcsin(mu/2)
    # against exact quadrature while the magnitude is unchanged
    out += (N * n - 0.5 * n * n) * log_qp - 0.25 * n * n * math.log(4 - mu * mu)
    out += 0.25j * omega_eff * N * n * complex(s, mu)
    out -= 0.5 * N * n * (1 + complex(mu * mu, -mu * s) / 2)
    return out


def k1_asymptotic(N: int, n: int, sp: SpectralPoint) -> MomentEstimate:
    """Leading large-N form of <Z(mu1)^{-n}>."""
    t0 = time.perf_counter()
    _check(N, n, sp)
    return _estimate(_log_k1(N, n, sp.mu, complex(sp.omega, 2 * sp.delta)), t0)


def k1_pair_asymptotic(N: int, n: int, sp: SpectralPoint) -> MomentEstimate:
    """<Z(mu1)^{-n}> <Z(mu2*)^{-n}>; the second factor is the conjugate at omega -> -omega."""
    t0 = time.perf_counter()
    _check(N, n, sp)
    a = _log_k1(N, n, sp.mu, complex(sp.omega, 2 * sp.delta))
    b = _log_k1(N, n, sp.mu, complex(-sp.omega, 2 * sp.delta)).conjugate()
    return _estimate(a + b, t0)


def k2_asymptotic(N: int, n: int, sp: SpectralPoint) -> MomentEstimate:
    """Leading large-N form of <[Z(mu1) Z(mu2*)]^{-n}>."""
    t0 = time.perf_counter()
    _check(N, n, sp)
    if N < 2 * n:
        raise ValueError("requires N >= 2n")
    mu = sp.mu
    rho = semicircle_density(mu)
    w = complex(sp.omega, 2 * sp.delta)
    out = n * math.log(2 * math.pi) - n * n * cmath.log(-1j * w)
    out += 2 * n * (N - n) * math.log(N)
    out -= sum(math.lgamma(j + 1) + math.lgamma(j - n + 1) for j in range(N - n, N))
    out += -n * N * (1 + mu * mu / 2) + 1j * N * n * math.pi * rho * w
    return _estimate(out, t0)


def moment_ratio_limit(n: int, mu: float, omega: float, delta: float) -> complex:
    """[2 pi rho(mu) / (-i (mu1 - mu2*))]^{n^2} with mu1 - mu2* = omega + 2 i delta."""
    _check_bulk(mu)
    w = complex(omega, 2 * delta)
    if w == 0:
        raise ValueError("ratio is singular at omega = delta = 0")
    return (2 * math.pi * semicircle_density(mu) / (-1j * w)) ** (n * n)


# ----------------------------------------------------------------------------
# chiral


def chiral_limit_moment(n: int, x: float, quad: QuadratureSpec | None = None) -> MomentEstimate:
    """int_{q>0} Delta^2(q) prod_i q_i^{-n} e^{-(x/2)(q_i + 1/q_i)} dq, without N-dependent constants.

    Evaluated after q = e^s, where the weight becomes e^{(1-n)s - x cosh s}.
    """
    t0 = time.perf_counter()
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if not x > 0:
        raise ValueError("x must be positive")
    if quad is None:
        # e^{-x cosh s} has dropped by e^{-60} relative to s = 0 at cosh S = 1 + 60/x
        S = math.acosh(1 + 60.0 / x) + abs(1 - n) * 2 + 2
        quad = QuadratureSpec(tuple(Dim.finite(-S, S, 200) for _ in range(n)), rtol=1e-12, max_doublings=3,
                              log_integrand=True)

    def f(*ss):
        out = sum((1 - n) * s - x * np.cosh(s) for s in ss)  # q^{-n} dq = e^{(1-n)s} ds
        for i in range(n):
            for j in range(i + 1, n):
                d = np.exp(ss[i]) - np.exp(ss[j])
                with np.errstate(divide="ignore"):
                    out = out + np.log(d * d + 0j)
        return out + 0j

    res = integrate_nd(f, quad.with_log())
    value = LogComplex(res.value.log_mag, 0.0)
    return MomentEstimate(value, 0.0, res.nodes_used, "quadrature", 1000.0 * (time.perf_counter() - t0),
                          res.converged, res.est_rel_error)


def chiral_quenched_bessel(x_f: float, x_b: float) -> float:
    """x_f I1(2x_f) K0(2x_b) + x_b I0(2x_f) K1(2x_b), up to an overall constant."""
    if not (x_f > 0 and x_b > 0):
        raise ValueError("x_f and x_b must be positive")
    a = math.log(x_f) + log_bessel_i(1, 2 * x_f) + log_bessel_k(0, 2 * x_b)
    b = math.log(x_b) + log_bessel_i(0, 2 * x_f) + log_bessel_k(1, 2 * x_b)
    m = max(a, b)
    return math.exp(m) * (math.exp(a - m) + math.exp(b - m))


# ----------------------------------------------------------------------------
# generating function


def generating_bracket(N: int, mu: float, omega_b: complex, omega_f: complex) -> complex:
    """(1/(w_b w_f)) [e^{ia(w_b+w_f)}(w_b-w_f)^2 - e^{ia(w_b-w_f)}(w_b+w_f)^2], a = N pi rho(mu)."""
    _check_bulk(mu)
    if omega_b == 0:
        raise ValueError("omega_b = 0 has no bosonic regularisation")
    a = N * math.pi * semicircle_density(mu)
    wb, wf = complex(omega_b), complex(omega_f)
    if abs(wf) < 1e-8 * max(1.0, abs(wb)):
        # finite omega_f -> 0 limit, taken analytically
        return cmath.exp(1j * a * wb) * (2j * a * wb - 4)
    return (cmath.exp(1j * a * (wb + wf)) * (wb - wf) ** 2 - cmath.exp(1j * a * (wb - wf)) * (wb + wf) ** 2) / (wb * wf)


def generating_asymptotic(N: int, mu: float, omega_b: float, omega_f: float, delta: float = 0.0) -> complex:
    """Large-N <Z(mu_f1) Z(mu_f2) / (Z(mu_b1) Z(mu_b2*))>, normalised to 1 at omega_f = omega_b.

    At omega_f = omega_b the bracket equals -4 for every omega_b, which fixes the
    overall constant. The bosonic separation enters as omega_b + 2 i delta.
    """
    wb = complex(omega_b, 2 * delta)
    return generating_bracket(N, mu, wb, omega_f) / -4.0
