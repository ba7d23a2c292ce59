"""Exact finite-N moments from the eigenvalue-coordinate integrals.

All half-line integrals are taken along a ray q = t e^{i theta} through the
saddle direction (|theta| < pi/4). The integrands are entire in q and carry a
Gaussian factor e^{-N q^2/2}, so the ray gives the same value as the real half
line while turning the oscillating factor e^{i N mu q} into a decaying one.
Without this, large |mu| cancels catastrophically on the real axis.

Full-line integrals with the action q^2/2 - i mu q - ln q are shifted to
q = t + i mu, which removes the e^{(N/2) mu^2} prefactor exactly and leaves a
polynomial times e^{-N t^2/2}; Gauss-Hermite then integrates them exactly.

Constants are assembled as complex logarithms via lgamma, e.g.
(-iN)^{Nn} -> Nn (log N - i pi/2), with the phase left unreduced.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import (BareSpectralPoint, GeneratingPoint, LogComplex, MomentEstimate, SpectralPoint,  # noqa: F401
                   logsumexp_complex)
from .quadrature import Dim, QuadratureSpec, gauss_hermite_rule, integrate_nd, oscillation_nodes
from .specfun import log_bessel_i, log_bessel_k

RAY_CAP = 0.9 * math.pi / 4
LOG_DROP = 46.0  # nats below the peak at which a 1D weight counts as negligible


def spectral_point(mu: float, omega: float = 0.0, delta: float = 0.0) -> BareSpectralPoint:
    """Spectral point for positive moments, where delta = 0 is allowed."""
    return BareSpectralPoint(mu=mu, omega=omega, delta=delta)


@dataclass(frozen=True)
class MomentParams:
    N: int
    n: int
    sp: SpectralPoint
    quad: QuadratureSpec | None = None
    radius_scale: float = 1.0
    rtol: float = 1e-11
    nodes: int | None = None  # per-dimension node count override for k1_negative_exact

    def __post_init__(self):
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be positive")
        if self.nodes is not None and self.nodes < 8:
            raise ValueError("node count must be >= 8")


# ----------------------------------------------------------------------------
# helpers


def _sum_lfact(lo: int, hi: int) -> float:
    """sum_{j=lo}^{hi} log j!"""
    return sum(math.lgamma(j + 1) for j in range(lo, hi + 1))


def log_c1_negative(N: int, n: int) -> complex:
    """log of (-iN)^{Nn} / (prod_{j=N-n}^{N-1} j! prod_{j=1}^n j!)."""
    return complex(N * n * math.log(N) - _sum_lfact(N - n, N - 1) - _sum_lfact(1, n), -N * n * math.pi / 2)


def log_c1_positive(N: int, n: int) -> complex:
    """log of (-i)^{Nn} N^{n^2/2} (2 pi)^{-n/2} / prod_{j=1}^n j!."""
    return complex(0.5 * n * n * math.log(N) - 0.5 * n * math.log(2 * math.pi) - _sum_lfact(1, n), -N * n * math.pi / 2)


def log_c2_negative(N: int, n: int) -> float:
    """log of N^{2Nn - n^2} / (prod_{j=N-n}^{N-1} j!(j-n)! [prod_{j=1}^n j!]^2)."""
    s = sum(math.lgamma(j + 1) + math.lgamma(j - n + 1) for j in range(N - n, N))
    return (2 * N * n - n * n) * math.log(N) - s - 2 * _sum_lfact(1, n)


def ray_angle(mu_re: float) -> float:
    """Direction of the saddle q+ = e^{i arcsin(mu/2)}, capped inside the Gaussian sector."""
    phi = math.asin(max(-1.0, min(1.0, mu_re / 2.0)))
    return math.copysign(min(RAY_CAP, abs(phi)), mu_re) if mu_re != 0 else 0.0


def auto_radius(logw: Callable, angle: float = 0.0, scale: float = 1.0, drop: float = LOG_DROP) -> float:
    """Truncation radius along the ray where Re log w falls `drop` nats below its peak."""
    rot = complex(math.cos(angle), math.sin(angle))
    T = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        while True:
            t = np.linspace(0.0, T, 4001)[1:]
            v = np.real(logw(t * rot))
            v = np.where(np.isnan(v), -np.inf, v)
            peak = np.max(v)
            if v[-1] < peak - drop:
                break
            T *= 2.0
            if T > 1e6:
                raise ValueError("weight does not decay; cannot choose a truncation radius")
    last = t[np.nonzero(v >= peak - drop)[0][-1]]
    return 1.25 * last * scale


def _base_nodes(d: int) -> int:
    return 200 if d <= 2 else 64


def _nodes(d: int, N: int, mu: complex, radius: float) -> int:
    return max(_base_nodes(d), oscillation_nodes(N, abs(mu), radius))


def _estimate(value: LogComplex, t0: float, npts: int, converged: bool, err: float, **extra) -> MomentEstimate:
    return MomentEstimate(value=value, std_error=0.0, n_samples=int(npts), method="quadrature",
                          runtime_ms=1000.0 * (time.perf_counter() - t0), converged=converged,
                          est_rel_error=float(err), extra=extra)


def _vandermonde_log(qs) -> np.ndarray | float:
    s = 0.0
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            d = qs[i] - qs[j]
            # log(d^2), not 2 log d: the latter turns log 0 into -inf + nan i
            s = s + np.log(d * d)
    return s


def _ray_moments(logw: Callable, max_power: int, radius: float, angle: float, nodes: int,
                 rtol: float = 1e-13) -> tuple[np.ndarray, float, float]:
    """Scaled moments m_k = e^{-s} int_ray q^k w(q) dq for k = 0..max_power.

    Returns (moments, shift s, estimated relative error from one node doubling).
    """
    def at(k):
        x, w = Dim.half_line(radius, k, angle=angle).rule()
        with np.errstate(divide="ignore"):
            lg = logw(x)
        s = float(np.max(lg.real))
        wt = w * np.exp(lg - s)
        pw = np.vstack([x ** k_ for k_ in range(max_power + 1)])
        return pw @ wt, s

    m1, s1 = at(nodes)
    m2, s2 = at(2 * nodes)
    m1 = m1 * math.exp(s1 - s2)
    err = float(np.max(np.abs(m2 - m1)) / np.max(np.abs(m2)))
    return m2, s2, err


# ----------------------------------------------------------------------------
# K1: negative moments, tensor form


def _check_k1(p: MomentParams, max_n: int | None = 3) -> None:
    if max_n is not None and p.n > max_n:
        raise ValueError(f"n={p.n} exceeds the quadrature dimension limit {max_n}")
    if p.N < p.n:
        raise ValueError("requires N >= n")
    if not isinstance(p.sp, SpectralPoint) or not p.sp.delta > 0:
        raise ValueError("negative moments need delta > 0")


def k1_negative_exact(p: MomentParams) -> MomentEstimate:
    """<Z(mu1)^{-n}> as the n-fold eigenvalue integral (n <= 3)."""
    t0 = time.perf_counter()
    _check_k1(p)
    N, n, mu1 = p.N, p.n, p.sp.mu1
    theta = ray_angle(mu1.real)

    def g(q):
        return (N - n) * np.log(q) - N * q * q / 2 + 1j * N * mu1 * q

    if p.quad is not None:
        spec = p.quad.with_log()
    else:
        R = auto_radius(g, theta, p.radius_scale)
        k = p.nodes or _nodes(n, N, mu1, R)
        spec = QuadratureSpec(tuple(Dim.half_line(R, k, angle=theta) for _ in range(n)), rtol=p.rtol,
                              max_doublings=2 if n <= 2 else 1, log_integrand=True)

    def f(*qs):
        with np.errstate(divide="ignore"):
            return sum(g(q) for q in qs) + _vandermonde_log(qs)

    res = integrate_nd(f, spec)
    value = res.value * LogComplex.from_log(log_c1_negative(N, n))
    return _estimate(value, t0, res.nodes_used, res.converged, res.est_rel_error, angle=theta)


# ----------------------------------------------------------------------------
# K1: determinant of one-dimensional integrals


@lru_cache(maxsize=None)
def determinant_calibration(N: int, n: int) -> LogComplex:
    """Constant c with <Z^{-n}> = c det Phi.

    Fixed from the large-mu limit: there Phi_jk -> Gamma(N-n+j+k+1)/(-iN mu1)^{N-n+j+k+1},
    so det Phi -> det[Gamma(N-n+j+k+1)] (-iN mu1)^{-nN} and the moment must tend to
    mu1^{-nN}. The Hankel determinant of Gammas is evaluated numerically.
    """
    a = N - n + 1
    lg = np.array([[math.lgamma(a + j + k) for k in range(n)] for j in range(n)])
    diag = np.array([math.lgamma(a + 2 * j) for j in range(n)])
    scaled = np.exp(lg - 0.5 * diag[:, None] - 0.5 * diag[None, :])
    sign, logabs = np.linalg.slogdet(scaled)
    log_d = logabs + diag.sum() + (0.0 if sign > 0 else math.pi * 1j)
    return LogComplex.from_log(complex(N * n * math.log(N), -N * n * math.pi / 2) - log_d)


def k1_negative_determinant(p: MomentParams, family: str = "monomial", shift: float = 1.0) -> MomentEstimate:
    """<Z(mu1)^{-n}> via det[Phi_jk], Phi_jk = int q^{N-n} pi_j pi_k e^{N(i mu1 q - q^2/2)} dq.

    family selects the monic polynomials: q^j ("monomial") or (q - shift)^j ("shifted").
    """
    t0 = time.perf_counter()
    _check_k1(p, max_n=None)
    N, n, mu1 = p.N, p.n, p.sp.mu1
    theta = ray_angle(mu1.real)

    def g(q):
        return (N - n) * np.log(q) - N * q * q / 2 + 1j * N * mu1 * q

    R = auto_radius(g, theta, p.radius_scale)
    k = max(400, oscillation_nodes(N, abs(mu1), R))

    def logdet(nodes):
        x, w = Dim.half_line(R, nodes, angle=theta).rule()
        lg = g(x)
        s = float(np.max(lg.real))
        wt = w * np.exp(lg - s)
        base = x if family == "monomial" else x - shift
        if family not in ("monomial", "shifted"):
            raise ValueError(f"unknown polynomial family {family!r}")
        P = np.vstack([base ** j for j in range(n)])
        phi = (P * wt) @ P.T
        sign, logabs = np.linalg.slogdet(phi)
        return complex(logabs + n * s, np.angle(sign))

    coarse = logdet(k)
    fine = logdet(2 * k)
    err = abs(np.exp(coarse - fine) - 1)
    value = LogComplex.from_log(fine) * determinant_calibration(N, n)
    return _estimate(value, t0, 2 * k, err < 1e-9, err, family=family)


# ----------------------------------------------------------------------------
# positive moments


def k1_positive_exact(p: MomentParams) -> MomentEstimate:
    """<Z(mu1)^n> from the shifted full-line integral, exact Gauss-Hermite (n <= 3)."""
    t0 = time.perf_counter()
    N, n, mu1 = p.N, p.n, p.sp.mu1
    if n > 3:
        raise ValueError("n <= 3 supported")

    def total(k):
        x, w = gauss_hermite_rule(k)
        t = x * math.sqrt(2.0 / N)
        lw = np.log(w * math.sqrt(2.0 / N))
        with np.errstate(divide="ignore"):
            per = N * np.log(t + 1j * mu1) + lw
        grids = np.meshgrid(*([per] * n), indexing="ij")
        tg = np.meshgrid(*([t] * n), indexing="ij")
        with np.errstate(divide="ignore"):
            logs = sum(grids) + _vandermonde_log(tg)
        return logsumexp_complex(logs)

    k = N // 2 + n + 4
    a, b = total(k), total(k + 4)
    err = a.rel_diff(b) if b.log_mag > -math.inf else 0.0
    value = b * LogComplex.from_log(log_c1_positive(N, n))
    return _estimate(value, t0, (k + 4) ** n, True, err)


def k2_positive_exact(p: MomentParams) -> MomentEstimate:
    """<[Z(mu1) Z(mu2*)]^n> for n = 1.

    The second block takes the conjugate phase (+i)^N and the overall sign is
    flipped; both checked against Monte Carlo for N = 1..5. At
    mu1 = mu2* the fake pole is removed by averaging omega = +-h.
    """
    t0 = time.perf_counter()
    if p.n != 1:
        raise ValueError("only n = 1 is implemented for the positive correlator")
    N, sp = p.N, p.sp
    h = 1e-5
    if abs(sp.mu1 - sp.mu2_star) < 1e-7:
        a = _k2_positive_raw(N, sp.mu1 + h / 2, sp.mu2_star - h / 2)
        b = _k2_positive_raw(N, sp.mu1 - h / 2, sp.mu2_star + h / 2)
        value = LogComplex.from_complex(0.5 * (a.to_complex() + b.to_complex()))
    else:
        value = _k2_positive_raw(N, sp.mu1, sp.mu2_star)
    return _estimate(value, t0, (N // 2 + 6) ** 2, True, 0.0)


def _k2_positive_raw(N: int, mu1: complex, mu2s: complex) -> LogComplex:
    k = N // 2 + 6
    x, w = gauss_hermite_rule(k)
    t = x * math.sqrt(2.0 / N)
    lw = np.log(w * math.sqrt(2.0 / N))
    q1 = t + 1j * mu1
    q2 = t - 1j * mu2s
    with np.errstate(divide="ignore"):
        logs = (N * np.log(q1) + lw)[:, None] + (N * np.log(q2) + lw)[None, :] + np.log(q1[:, None] + q2[None, :])
    s = logsumexp_complex(logs)
    # the mu2* block is the conjugate of a mu1 block, so its phase is (+i)^N, not (-i)^N
    c1 = log_c1_positive(N, 1)
    const = c1 + c1.conjugate() - np.log(-1j * (mu1 - mu2s)) + 1j * math.pi
    return s * LogComplex.from_log(const)


# ----------------------------------------------------------------------------
# K2: negative moments of the second type


def _check_k2(p: MomentParams) -> None:
    if p.n > 2:
        raise ValueError("n <= 2 supported for the correlation function")
    if p.N < 2 * p.n:
        raise ValueError("requires N >= 2n")
    if not p.sp.delta > 0:
        raise ValueError("negative moments need delta > 0")


def k2_negative_exact(p: MomentParams, method: str = "reduced") -> MomentEstimate:
    """<[Z(mu1) Z(mu2*)]^{-n}> from the 2n-fold integral over two positive blocks.

    The second block carries its own Vandermonde square. method="tensor" is the
    literal 2n-dimensional quadrature; "reduced" integrates the first block
    exactly through Andreief's identity (n! det of 1D moments), leaving an
    n-dimensional integral over the second block.
    """
    t0 = time.perf_counter()
    _check_k2(p)
    N, n, sp = p.N, p.n, p.sp
    mu1, mu2s = sp.mu1, sp.mu2_star
    theta = ray_angle(sp.mu)

    def g1(q):
        return (N - 2 * n) * np.log(q) - N * q * q / 2 + 1j * N * mu1 * q

    def g2(q):
        return (N - 2 * n) * np.log(q) - N * q * q / 2 - 1j * N * mu2s * q

    R1 = auto_radius(g1, theta, p.radius_scale)
    R2 = auto_radius(g2, -theta, p.radius_scale)
    const = log_c2_negative(N, n) - n * n * np.log(-1j * (mu1 - mu2s))

    if method == "tensor":
        k = 200 if n == 1 else 32
        k1n = max(k, oscillation_nodes(N, abs(mu1), R1))
        k2n = max(k, oscillation_nodes(N, abs(mu2s), R2))
        dims = [Dim.half_line(R1, k1n, angle=theta)] * n + [Dim.half_line(R2, k2n, angle=-theta)] * n
        spec = QuadratureSpec(tuple(dims), rtol=p.rtol if n == 1 else 1e-7,
                              max_doublings=2 if n == 1 else 1, log_integrand=True)

        def f(*qs):
            a, b = qs[:n], qs[n:]
            with np.errstate(divide="ignore"):
                s = sum(g1(q) for q in a) + sum(g2(q) for q in b)
                s = s + _vandermonde_log(a) + _vandermonde_log(b)
                for x in a:
                    for y in b:
                        s = s + np.log(x + y)
            return s

        res = integrate_nd(f, spec)
        value = res.value * LogComplex.from_log(const)
        return _estimate(value, t0, res.nodes_used, res.converged, res.est_rel_error, method="tensor")
    if method != "reduced":
        raise ValueError(f"unknown method {method!r}")

    kmom = max(400, oscillation_nodes(N, abs(mu1), R1))
    M, s1, merr = _ray_moments(g1, 3 * n - 2, R1, theta, kmom)

    def logdet_a(ys):
        # coefficients e_r of prod_l (q + y_l) = sum_r e_r q^{n-r}
        if n == 1:
            return np.log(M[1] + ys[0] * M[0])
        e1 = ys[0] + ys[1]
        e2 = ys[0] * ys[1]

        def A(j, k):
            m = j + k + 2
            return M[m] + e1 * M[m - 1] + e2 * M[m - 2]

        det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0)
        return np.log(det)

    k2n = max(_base_nodes(n), oscillation_nodes(N, abs(mu2s), R2))
    spec = QuadratureSpec(tuple(Dim.half_line(R2, k2n, angle=-theta) for _ in range(n)), rtol=p.rtol,
                          max_doublings=2, log_integrand=True)

    def f(*ys):
        with np.errstate(divide="ignore"):
            return sum(g2(y) for y in ys) + _vandermonde_log(ys) + logdet_a(ys)

    res = integrate_nd(f, spec)
    scale = LogComplex.from_log(const + n * s1 + math.lgamma(n + 1))
    value = res.value * scale
    err = max(res.est_rel_error, merr)
    return _estimate(value, t0, res.nodes_used + 2 * kmom, res.converged and merr < 1e-10, err, method="reduced")


# ----------------------------------------------------------------------------
# chiral negative moments


def log_chiral_constant(N: int, n: int) -> float:
    """N^{Nn} / (prod_{j=N-n}^{N-1} j! prod_{j=1}^n j!) in eigenvalue coordinates."""
    return N * n * math.log(N) - _sum_lfact(N - n, N - 1) - _sum_lfact(1, n)


def chiral_negative_exact(N: int, n: int, m: float, quad: QuadratureSpec | None = None,
                          radius_scale: float = 1.0, rtol: float = 1e-11, nodes: int = 200) -> MomentEstimate:
    """<det(m^2 + J^dagger J)^{-n}> over chiral GUE blocks, n in {1, 2}."""
    t0 = time.perf_counter()
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if N < n:
        raise ValueError("requires N >= n")
    if not m > 0:
        raise ValueError("mass must be positive (it is the regulariser)")

    def g(q):
        return (N - n) * np.log(q) - N * np.log(q + m) - m * N * q

    if quad is not None:
        spec = quad.with_log()
    else:
        R = auto_radius(g, 0.0, radius_scale)
        spec = QuadratureSpec(tuple(Dim.half_line(R, nodes) for _ in range(n)), rtol=rtol, max_doublings=2,
                              log_integrand=True)

    def f(*qs):
        with np.errstate(divide="ignore"):
            return sum(g(q) for q in qs) + _vandermonde_log(qs)

    res = integrate_nd(f, spec)
    value = res.value * LogComplex(log_chiral_constant(N, n), 0.0)
    value = LogComplex(value.log_mag, 0.0) if abs(math.sin(value.phase)) < 1e-12 else value
    return _estimate(value, t0, res.nodes_used, res.converged, res.est_rel_error)


# ----------------------------------------------------------------------------
# generating function with two numerator and two denominator polynomials


def _generating_raw_reduced(N: int, g: GeneratingPoint, radius_scale: float = 1.0) -> tuple[LogComplex, float]:
    mb1, mb2s, mf1, mf2 = (complex(v) for v in (g.mu_b1, g.mu_b2_star, g.mu_f1, g.mu_f2))
    th1, th2 = ray_angle(mb1.real), -ray_angle(mb2s.real)

    def gp1(p):
        return (N - 2) * np.log(p) - N * p * p / 2 + 1j * N * mb1 * p

    def gp2(p):
        return (N - 2) * np.log(p) - N * p * p / 2 - 1j * N * mb2s * p

    R1 = auto_radius(gp1, th1, radius_scale)
    R2 = auto_radius(gp2, th2, radius_scale)
    M1, s1, e1 = _ray_moments(gp1, 3, R1, th1, max(400, oscillation_nodes(N, abs(mb1), R1)))
    M2, s2, e2 = _ray_moments(gp2, 3, R2, th2, max(400, oscillation_nodes(N, abs(mb2s), R2)))

    k = N // 2 + 6
    x, w = gauss_hermite_rule(k)
    t = x * math.sqrt(2.0 / N)
    lw = np.log(w * math.sqrt(2.0 / N))
    Q1 = (t + 1j * mf1)[:, None]
    Q2 = (t + 1j * mf2)[None, :]
    # cross factor prod_i (q_i - p1)(q_i + p2), expanded in powers of p1 and p2
    a = (Q1 * Q2, -(Q1 + Q2), 1.0)
    b = (Q1 * Q2, Q1 + Q2, 1.0)
    F = 0.0
    for kk in range(3):
        for ll in range(3):
            F = F + a[kk] * b[ll] * (M1[kk + 1] * M2[ll] + M1[kk] * M2[ll + 1])
    with np.errstate(divide="ignore"):
        logs = ((N - 2) * np.log(Q1) + lw[:, None]) + ((N - 2) * np.log(Q2) + lw[None, :]) \
            + np.log(Q1 - Q2) + np.log(F)
    total = logsumexp_complex(logs)
    denom = complex(np.log((mb1 - mb2s) * (mf1 - mf2)))
    return total * LogComplex.from_log(s1 + s2 - denom), max(e1, e2)


def _generating_raw_tensor(N: int, g: GeneratingPoint, nodes: int = 32) -> tuple[LogComplex, float]:
    mb1, mb2s, mf1, mf2 = (complex(v) for v in (g.mu_b1, g.mu_b2_star, g.mu_f1, g.mu_f2))
    th1, th2 = ray_angle(mb1.real), -ray_angle(mb2s.real)

    def gp1(p):
        return (N - 2) * np.log(p) - N * p * p / 2 + 1j * N * mb1 * p

    def gp2(p):
        return (N - 2) * np.log(p) - N * p * p / 2 - 1j * N * mb2s * p

    R1 = auto_radius(gp1, th1)
    R2 = auto_radius(gp2, th2)
    Rq = math.sqrt(2 * LOG_DROP / N) * 1.25
    dims = (Dim.full_line(Rq, nodes, offset=1j * mf1), Dim.full_line(Rq, nodes, offset=1j * mf2),
            Dim.half_line(R1, nodes, angle=th1), Dim.half_line(R2, nodes, angle=th2))
    spec = QuadratureSpec(dims, rtol=1e-7, max_doublings=1, log_integrand=True)

    def f(q1, q2, p1, p2):
        # after the shift q = t + i mu_f the q-weight is (q)^{N-2} e^{-N t^2/2}
        t1, t2 = q1 - 1j * mf1, q2 - 1j * mf2
        with np.errstate(divide="ignore"):
            s = (N - 2) * (np.log(q1) + np.log(q2)) - N * (t1 * t1 + t2 * t2) / 2
            s = s + gp1(p1) + gp2(p2) + np.log(q1 - q2) + np.log(p1 + p2)
            s = s + np.log((q1 - p1) * (q1 + p2) * (q2 - p1) * (q2 + p2))
        return s

    res = integrate_nd(f, spec)
    denom = complex(np.log((mb1 - mb2s) * (mf1 - mf2)))
    return res.value * LogComplex.from_log(-denom), res.est_rel_error


def _generating_raw(N: int, g: GeneratingPoint, method: str, radius_scale: float = 1.0):
    if method == "reduced":
        return _generating_raw_reduced(N, g, radius_scale)
    if method == "tensor":
        return _generating_raw_tensor(N, g)
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=None)
def generating_calibration(N: int, method: str = "reduced") -> LogComplex:
    """Inverse of the raw integral at a point where fermionic and bosonic data coincide."""
    ref = GeneratingPoint.local(0.0, 0.4, 0.0, 0.3).trivial()
    raw, _ = _generating_raw(N, ref, method)
    return 1 / raw


def generating_exact(N: int, g: GeneratingPoint, method: str = "reduced", radius_scale: float = 1.0) -> MomentEstimate:
    """<Z(mu_f1) Z(mu_f2) / (Z(mu_b1) Z(mu_b2*))> with the calibrated constant.

    The integrand carries the factor prod_{i=1,2}(q_i - p1)(q_i + p2) coupling
    the fermionic (q) and bosonic (p) variables; without it the integral
    factorises and cannot reproduce the ensemble average.
    """
    t0 = time.perf_counter()
    if N < 3:
        raise ValueError("requires N >= 3")
    h = 1e-4
    if abs(complex(g.mu_f1) - complex(g.mu_f2)) < 1e-7:
        g = GeneratingPoint(g.mu_b1, g.mu_b2_star, complex(g.mu_f1) + h / 2, complex(g.mu_f2) - h / 2)
    raw, err = _generating_raw(N, g, method, radius_scale)
    value = raw * generating_calibration(N, method)
    return _estimate(value, t0, 0, err < 1e-6, err, method=method)


# ----------------------------------------------------------------------------
# chiral quenched generating function


def _chiral_gen_raw(N: int, m_f: float, m_b: float, radius_scale: float = 1.0) -> tuple[LogComplex, float]:
    xf, xb = N * m_f, N * m_b

    def la(r):
        return (N - 1) * np.log(r) - N * r + log_bessel_i(0, 2 * xf * np.sqrt(r))

    def lb(r):
        return (N - 1) * np.log(r) - N * r + log_bessel_k(0, 2 * xb * np.sqrt(r))

    def moments(lw):
        def real_lw(z):
            return lw(np.real(z))

        R = auto_radius(real_lw, 0.0, radius_scale)
        out = []
        for k in (400, 800):
            x, w = Dim.half_line(R, k).rule()
            lg = lw(x)
            s = float(np.max(lg))
            v = w * np.exp(lg - s)
            out.append((np.sum(v), np.sum(v * x), s))
        (a0, a1, _), (b0, b1, s) = out
        err = abs(a1 / a0 - b1 / b0) / abs(b1 / b0)
        return b0, b1 / b0, s, err

    A0, ra, sa, ea = moments(la)
    B0, rb, sb, eb = moments(lb)
    # (r - t) splits the double integral: A1 B0 - A0 B1 = A0 B0 (A1/A0 - B1/B0)
    diff = ra - rb
    val = LogComplex.from_complex(diff) * LogComplex(math.log(A0) + math.log(B0) + sa + sb - xf * xf / N, 0.0)
    return val, max(ea, eb) / max(abs(diff), 1e-300)


def chiral_generating_exact(N: int, m_f: float, m_b: float, radius_scale: float = 1.0) -> MomentEstimate:
    """<det(m_f^2 + J^dagger J) / det(m_b^2 + J^dagger J)>, calibrated to 1 at m_f = m_b.

    Uses x = N m for the Bessel arguments together with the prefactor e^{-x_f^2/N}.
    """
    t0 = time.perf_counter()
    if N < 2:
        raise ValueError("requires N >= 2")
    if not (m_f > 0 and m_b > 0):
        raise ValueError("masses must be positive")
    raw, err = _chiral_gen_raw(N, m_f, m_b, radius_scale)
    ref, err_ref = _chiral_gen_raw(N, m_b, m_b, radius_scale)
    value = raw / ref
    if abs(math.sin(value.phase)) < 1e-12:
        value = LogComplex(value.log_mag, 0.0 if math.cos(value.phase) > 0 else math.pi)
    return _estimate(value, t0, 3200, max(err, err_ref) < 1e-8, max(err, err_ref))
