"""Monte Carlo estimators for GUE and chiral GUE averages.

Every estimator works with per-sample complex logarithms, e.g.
-n sum_j log(mu1 - lambda_j) for <Z(mu1)^{-n}>. The logs are shifted by their
largest real part before exponentiating, so averages stay representable for
any N, and the shift is put back on the LogComplex result.

Samples are drawn in chunks; chunk c uses the stream spawned from
(seed, stream_id, c), so the estimate for given (seed, chunk_size) does not
depend on how the chunks are scheduled.

With point_mass=True the matrix is replaced by H = 0 (or J = 0), a test hook
whose averages are known in closed form.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import GeneratingPoint, LogComplex, MomentEstimate, RngSeed, SpectralPoint
from .ensembles import ContractViolation, sample_chiral_batch, sample_gue_batch

ESTIMATORS = ("plain_mean", "median_of_means")
MIN_SAMPLES = 100
# sqrt(pi/2): asymptotic ratio of the standard deviation of a sample median to that of a mean
_MEDIAN_EFFICIENCY = math.sqrt(math.pi / 2)


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 100_000
    seed: RngSeed = RngSeed(0)
    chunk_size: int = 10_000
    estimator: str = "median_of_means"
    groups: int = 32
    point_mass: bool = False

    def __post_init__(self):
        if self.n_samples < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "median_of_means" and not 2 <= self.groups <= self.n_samples:
            raise ValueError("group count must lie in [2, n_samples]")


def _tree_sum(parts: list[complex]) -> complex:
    """Pairwise reduction in a fixed order."""
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0] if parts else 0j


def aggregate(samples, estimator: str = "median_of_means", groups: int = 32, log_shift: float = 0.0,
              t0: float | None = None) -> MomentEstimate:
    """Combine per-sample values into a MomentEstimate.

    plain_mean: the sample mean, standard error sqrt(var(Re) + var(Im)) / sqrt(S).
    median_of_means: the sample is cut into `groups` contiguous blocks; the
    estimate is the coordinate-wise median of the block means, with standard
    error sqrt(pi/2) * std(block means) / sqrt(groups).

    Values are interpreted as exp(-log_shift) times the true values.
    """
    x = np.asarray(samples, dtype=complex).ravel()
    if x.size == 0:
        raise ValueError("empty sample stream")
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    t0 = time.perf_counter() if t0 is None else t0
    S = x.size
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    if np.all(x == x[0]):
        # degenerate stream: return it exactly, free of summation rounding
        value = LogComplex.from_complex(x[0]) * LogComplex(log_shift, 0.0)
        return MomentEstimate(value, 0.0, S, "mc", runtime_ms=1000.0 * (time.perf_counter() - t0),
                              extra={"estimator": estimator})
    if estimator == "plain_mean":
        blocks = np.array_split(x, max(1, S // 4096))
        mean = _tree_sum([complex(np.sum(b)) for b in blocks]) / S
        se = math.sqrt(float(np.var(x.real) + np.var(x.imag)) / S)
    elif estimator == "median_of_means":
        if not 2 <= groups <= S:
            raise ValueError("group count must lie in [2, sample size]")
        means = np.array([np.mean(b) for b in np.array_split(x, groups)])
        mean = complex(np.median(means.real), np.median(means.imag))
        spread = float(np.var(means.real, ddof=1) + np.var(means.imag, ddof=1))
        se = _MEDIAN_EFFICIENCY * math.sqrt(spread / groups)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    value = LogComplex.from_complex(mean) * LogComplex(log_shift, 0.0)
    scale = math.exp(log_shift) if log_shift < 700 else math.inf
    return MomentEstimate(value, se * scale if se > 0 else 0.0, S, "mc",
                          runtime_ms=1000.0 * (time.perf_counter() - t0), extra={"estimator": estimator})


def _run(log_sample: Callable[[np.ndarray], np.ndarray], sampler: Callable, N: int, cfg: McConfig) -> MomentEstimate:
    """Draw cfg.n_samples matrices in chunks, evaluate log values, aggregate."""
    t0 = time.perf_counter()
    logs = []
    done = 0
    chunk = 0
    while done < cfg.n_samples:
        count = min(cfg.chunk_size, cfg.n_samples - done)
        if cfg.point_mass:
            spec = np.zeros((count, N))
        else:
            spec = sampler(N, count, cfg.seed, chunk)
        logs.append(log_sample(spec))
        done += count
        chunk += 1
    lv = np.concatenate(logs).astype(complex)
    shift = float(np.max(lv.real))
    if not math.isfinite(shift):
        shift = 0.0
    est = aggregate(np.exp(lv - shift), cfg.estimator, cfg.groups, log_shift=shift, t0=t0)
    return est


def _gue_eigs(N, count, seed, chunk):
    return np.linalg.eigvalsh(sample_gue_batch(N, count, seed, chunk))


def _chiral_sv2(N, count, seed, chunk):
    s = np.linalg.svd(sample_chiral_batch(N, count, seed, chunk), compute_uv=False)
    return s * s


def _logz(eigs: np.ndarray, mu: complex) -> np.ndarray:
    return np.sum(np.log(mu - eigs), axis=-1)


def _warn_delta(N: int, delta: float) -> None:
    if delta < 0.5 / N:
        warnings.warn(f"delta={delta} < 0.5/N: inverse-determinant samples are heavy-tailed and "
                      "Monte Carlo error bars are unreliable", RuntimeWarning, stacklevel=3)


def _check_negative(N: int, sp: SpectralPoint) -> None:
    if not isinstance(sp, SpectralPoint) or not sp.delta > 0:
        raise ValueError("negative moments need delta > 0 (Im mu1 > 0)")
    if N < 1:
        raise ValueError("N must be positive")
    _warn_delta(N, sp.delta)


def mc_k1(N: int, n: int, sp: SpectralPoint, cfg: McConfig) -> MomentEstimate:
    """<Z(mu1)^{-n}> over GUE."""
    _check_negative(N, sp)
    if n < 1:
        raise ValueError("n must be positive")
    mu1 = sp.mu1
    bound = -n * N * math.log(sp.delta)

    def logv(eigs):
        v = -n * _logz(eigs, mu1)
        # |mu1 - lambda| >= delta for real lambda
        if np.any(v.real > bound + 1e-9 * max(1.0, abs(bound))):
            raise ContractViolation("sample exceeds the bound delta^{-nN}")
        return v

    return _run(logv, _gue_eigs, N, cfg)


def mc_k2(N: int, n: int, sp: SpectralPoint, cfg: McConfig) -> MomentEstimate:
    """<[Z(mu1) Z(mu2*)]^{-n}> over GUE."""
    _check_negative(N, sp)
    mu1, mu2s = sp.mu1, sp.mu2_star
    return _run(lambda e: -n * (_logz(e, mu1) + _logz(e, mu2s)), _gue_eigs, N, cfg)


def mc_positive_moment(N: int, n: int, sp: SpectralPoint, cfg: McConfig) -> MomentEstimate:
    """<Z(mu1)^n> over GUE; delta may be zero."""
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    mu1 = sp.mu1

    def logv(eigs):
        with np.errstate(divide="ignore"):
            return n * _logz(eigs, mu1)

    return _run(logv, _gue_eigs, N, cfg)


def mc_generating_function(N: int, g: GeneratingPoint, cfg: McConfig) -> MomentEstimate:
    """<Z(mu_f1) Z(mu_f2) / (Z(mu_b1) Z(mu_b2*))> over GUE."""
    if not isinstance(g, GeneratingPoint):
        raise TypeError("expected a GeneratingPoint")
    mb1, mb2s, mf1, mf2 = (complex(v) for v in (g.mu_b1, g.mu_b2_star, g.mu_f1, g.mu_f2))
    _warn_delta(N, min(mb1.imag, -mb2s.imag))

    def logv(eigs):
        with np.errstate(divide="ignore"):
            num = _logz(eigs, mf1) + _logz(eigs, mf2)
        return num - (_logz(eigs, mb1) + _logz(eigs, mb2s))

    return _run(logv, _gue_eigs, N, cfg)


def mc_chiral_moment(N: int, n: int, m: float, cfg: McConfig) -> MomentEstimate:
    """<det(m^2 + J^dagger J)^{-n}> over the chiral ensemble; samples are real-positive."""
    if not m > 0:
        raise ValueError("mass must be positive (it is the regulariser)")
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    m2 = m * m
    return _run(lambda s2: (-n * np.sum(np.log(m2 + s2), axis=-1)).astype(complex), _chiral_sv2, N, cfg)
