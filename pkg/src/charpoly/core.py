"""Shared value types: log-domain complex numbers, spectral points, seeds, estimates."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

METHODS = ("mc", "quadrature", "asymptotic", "closed_form")
_U64 = 2 ** 64


@dataclass(frozen=True)
class LogComplex:
    """Complex number stored as (log |z|, arg z).

    Products add both fields exactly, and the phase is never folded back into
    (-pi, pi], so a product of many unimodular factors keeps its full winding.
    """

    log_mag: float
    phase: float = 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def from_log(cls, w: complex) -> "LogComplex":
        w = complex(w)
        return cls(w.real, w.imag)

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @property
    def log(self) -> complex:
        return complex(self.log_mag, self.phase)

    def to_complex(self) -> complex:
        if self.log_mag == -math.inf:
            return 0j
        return cmath.rect(math.exp(self.log_mag), self.phase)

    def __complex__(self) -> complex:
        return self.to_complex()

    def __abs__(self) -> float:
        return math.exp(self.log_mag)

    def __mul__(self, other):
        other = _coerce(other)
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: float):
        return LogComplex(self.log_mag * k, self.phase * k)

    def __neg__(self):
        return LogComplex(self.log_mag, self.phase + math.pi)

    def conj(self) -> "LogComplex":
        return LogComplex(self.log_mag, -self.phase)

    def __add__(self, other):
        other = _coerce(other)
        if self.log_mag == -math.inf:
            return other
        if other.log_mag == -math.inf:
            return self
        big, small = (self, other) if self.log_mag >= other.log_mag else (other, self)
        rel = cmath.rect(math.exp(small.log_mag - big.log_mag), small.phase - big.phase)
        s = 1.0 + rel
        if s == 0:
            return LogComplex.zero()
        return LogComplex(big.log_mag + math.log(abs(s)), big.phase + cmath.phase(s))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def rel_diff(self, other) -> float:
        """|self/other - 1|, computed without leaving the log domain."""
        other = _coerce(other)
        r = cmath.exp(complex(self.log_mag - other.log_mag, self.phase - other.phase))
        return abs(r - 1.0)

    def mag_rel_diff(self, other) -> float:
        """Relative difference of magnitudes only (phase ignored)."""
        return abs(math.expm1(self.log_mag - _coerce(other).log_mag))


def _coerce(x) -> LogComplex:
    if isinstance(x, LogComplex):
        return x
    return LogComplex.from_complex(x)


def logsumexp_complex(logs: np.ndarray, weights_log: np.ndarray | None = None) -> LogComplex:
    """log of sum(exp(logs)) for complex logs, returned as LogComplex."""
    logs = np.asarray(logs, dtype=complex).ravel()
    if weights_log is not None:
        logs = logs + np.asarray(weights_log, dtype=complex).ravel()
    if logs.size == 0:
        return LogComplex.zero()
    shift = np.max(logs.real)
    if shift == -math.inf:
        return LogComplex.zero()
    s = np.sum(np.exp(logs - shift))
    if s == 0:
        return LogComplex.zero()
    return LogComplex(float(shift + math.log(abs(s))), float(cmath.phase(s)))


@dataclass(frozen=True)
class SpectralPoint:
    """mu1 = mu + omega/2 + i delta and mu2* = mu - omega/2 - i delta."""

    mu: float
    omega: float = 0.0
    delta: float = 0.1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive (Im mu1 > 0), got {self.delta}")

    @classmethod
    def from_mu1(cls, mu1: complex) -> "SpectralPoint":
        return cls(mu=mu1.real, omega=0.0, delta=mu1.imag)

    @property
    def mu1(self) -> complex:
        return complex(self.mu + self.omega / 2, self.delta)

    @property
    def mu2(self) -> complex:
        return complex(self.mu - self.omega / 2, self.delta)

    @property
    def mu2_star(self) -> complex:
        return complex(self.mu - self.omega / 2, -self.delta)

    def as_dict(self) -> dict:
        return {"mu": self.mu, "omega": self.omega, "delta": self.delta}


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for v in (self.seed, self.stream_id):
            if not 0 <= int(v) < _U64:
                raise ValueError(f"seed components must be 64-bit unsigned, got {v}")

    def sequence(self, *extra: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id), *extra))

    def generator(self, *extra: int) -> np.random.Generator:
        # PCG64 is specified bit-for-bit, so streams agree across platforms
        return np.random.Generator(np.random.PCG64(self.sequence(*extra)))


@dataclass(frozen=True)
class MomentEstimate:
    value: LogComplex
    std_error: float
    n_samples: int
    method: str
    runtime_ms: float = 0.0
    converged: bool = True
    est_rel_error: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValueError("std_error must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def complex(self) -> complex:
        return self.value.to_complex()


@dataclass(frozen=True)
class BareSpectralPoint(SpectralPoint):
    """Spectral point that allows delta = 0 (positive moments need no regularisation)."""

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")


@dataclass(frozen=True)
class GeneratingPoint:
    """Spectral data of <Z(mu_f1) Z(mu_f2) / (Z(mu_b1) Z(mu_b2*))>."""

    mu_b1: complex
    mu_b2_star: complex
    mu_f1: complex
    mu_f2: complex

    def __post_init__(self):
        if not complex(self.mu_b1).imag > 0 or not complex(self.mu_b2_star).imag < 0:
            raise ValueError("bosonic regularisation missing: need Im mu_b1 > 0 and Im mu_b2* < 0")

    @classmethod
    def local(cls, mu: float, omega_b: float, omega_f: float, delta: float) -> "GeneratingPoint":
        return cls(complex(mu + omega_b / 2, delta), complex(mu - omega_b / 2, -delta),
                   complex(mu + omega_f / 2), complex(mu - omega_f / 2))

    def trivial(self) -> "GeneratingPoint":
        return GeneratingPoint(self.mu_b1, self.mu_b2_star, self.mu_b1, self.mu_b2_star)
