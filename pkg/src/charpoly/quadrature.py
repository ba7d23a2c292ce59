"""Tensor-product Gauss quadrature in up to four dimensions for complex integrands.

Each dimension is one of
  finite     [a, b], real nodes;
  half_line  q = offset + t e^{i angle}, t in [0, radius];
  full_line  q = offset + t e^{i angle}, t in [-radius, radius].
The ray/line variants let callers move the contour of an entire integrand
(a complex offset or a rotation) without changing the value; the weights carry
the Jacobian e^{i angle}.

Refinement doubles every node count and compares successive values
(one-step Richardson-style estimate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import LogComplex

DOMAINS = ("finite", "half_line", "full_line")


class IntegrandError(ArithmeticError):
    pass


@lru_cache(maxsize=256)
def _leggauss(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def _hermgauss(k: int):
    x, w = np.polynomial.hermite.hermgauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_rule(k: int, a: float, b: float):
    """Nodes and weights of the k-point Gauss-Legendre rule on [a, b]."""
    if k < 1:
        raise ValueError("need at least one node")
    if not a < b:
        raise ValueError("need a < b")
    x, w = _leggauss(int(k))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def gauss_hermite_rule(k: int):
    """Nodes and weights for the weight e^{-x^2} on the real line."""
    if k < 1:
        raise ValueError("need at least one node")
    x, w = _hermgauss(int(k))
    return x.copy(), w.copy()


def oscillation_nodes(N: int, mu: float, radius: float) -> int:
    """Node floor that keeps >= 2 nodes per half-period of e^{i N mu q} over the radius."""
    return 8 + math.ceil(abs(N * mu * radius) / math.pi)


@dataclass(frozen=True)
class Dim:
    domain: str = "finite"
    nodes: int = 64
    a: float = 0.0
    b: float = 1.0
    radius: float = 10.0
    angle: float = 0.0
    offset: complex = 0.0

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.nodes < 8:
            raise ValueError("node count must be >= 8")
        if self.domain == "finite" and not self.a < self.b:
            raise ValueError("finite domain needs a < b")
        if self.domain != "finite" and not self.radius > 0:
            raise ValueError("truncation radius must be positive")

    @classmethod
    def finite(cls, a: float, b: float, nodes: int = 64) -> "Dim":
        return cls("finite", nodes, a=a, b=b)

    @classmethod
    def half_line(cls, radius: float, nodes: int = 64, angle: float = 0.0, offset: complex = 0.0) -> "Dim":
        return cls("half_line", nodes, radius=radius, angle=angle, offset=offset)

    @classmethod
    def full_line(cls, radius: float, nodes: int = 64, angle: float = 0.0, offset: complex = 0.0) -> "Dim":
        return cls("full_line", nodes, radius=radius, angle=angle, offset=offset)

    @property
    def is_real(self) -> bool:
        return self.domain == "finite" or (self.angle == 0.0 and complex(self.offset).imag == 0.0)

    def rule(self, k: int | None = None):
        k = self.nodes if k is None else k
        if self.domain == "finite":
            return gauss_legendre_rule(k, self.a, self.b)
        lo = 0.0 if self.domain == "half_line" else -self.radius
        t, w = gauss_legendre_rule(k, lo, self.radius)
        if self.is_real:
            return t + complex(self.offset).real, w
        rot = complex(math.cos(self.angle), math.sin(self.angle))
        return self.offset + t * rot, w * rot


@dataclass(frozen=True)
class QuadratureSpec:
    dims: tuple
    rtol: float = 1e-10
    atol: float = 0.0
    max_doublings: int = 2
    log_integrand: bool = False
    chunk_points: int = 1 << 20

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not 1 <= len(self.dims) <= 4:
            raise ValueError("dimension must be 1..4")
        if not 0 < self.rtol < 0.1:
            raise ValueError("tolerance must lie in (0, 0.1)")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")

    def with_log(self, flag: bool = True) -> "QuadratureSpec":
        return replace(self, log_integrand=flag)

    def scaled_nodes(self, factor: float) -> "QuadratureSpec":
        return replace(self, dims=tuple(replace(d, nodes=max(8, int(round(d.nodes * factor)))) for d in self.dims))


@dataclass(frozen=True)
class QuadratureResult:
    value: LogComplex
    est_rel_error: float
    nodes_used: int
    converged: bool
    history: list = field(default_factory=list, compare=False)

    @property
    def complex(self) -> complex:
        return self.value.to_complex()


def _tensor_sum(f: Callable, rules: Sequence, log_mode: bool, chunk_points: int) -> LogComplex:
    d = len(rules)
    xs = [r[0] for r in rules]
    ws = [np.asarray(r[1]) for r in rules]
    rest = int(np.prod([len(x) for x in xs[1:]])) if d > 1 else 1
    block = max(1, chunk_points // max(rest, 1))
    # broadcast views for the trailing dimensions
    tails = []
    for j in range(1, d):
        shape = [1] * d
        shape[j] = len(xs[j])
        tails.append((xs[j].reshape(shape), ws[j].reshape(shape)))
    if log_mode:
        logw_tail = 0.0
        for _, w in tails:
            logw_tail = logw_tail + np.log(w.astype(complex))
    else:
        w_tail = 1.0
        for _, w in tails:
            w_tail = w_tail * w

    shift = -math.inf
    acc = 0j
    n0 = len(xs[0])
    for start in range(0, n0, block):
        stop = min(n0, start + block)
        shape = [1] * d
        shape[0] = stop - start
        x0 = xs[0][start:stop].reshape(shape)
        w0 = ws[0][start:stop].reshape(shape)
        args = [x0] + [t[0] for t in tails]
        vals = np.asarray(f(*args))
        if vals.shape != np.broadcast_shapes(*(a.shape for a in args)):
            vals = np.broadcast_to(vals, np.broadcast_shapes(*(a.shape for a in args)))
        if log_mode:
            vals = vals.astype(complex)
            bad = np.isnan(vals.real) | np.isnan(vals.imag) | (vals.real == np.inf)
            if np.any(bad):
                _raise_bad(bad, args)
            lv = vals + np.log(w0.astype(complex)) + logw_tail
            m = float(np.max(lv.real))
            if m == -math.inf:
                continue
            if m > shift:
                acc = acc * math.exp(shift - m) if shift > -math.inf else 0j
                shift = m
            acc += complex(np.sum(np.exp(lv - shift)))
        else:
            if not np.all(np.isfinite(vals)):
                _raise_bad(~np.isfinite(vals), args)
            acc += complex(np.sum(vals * w0 * w_tail))
    if log_mode:
        if acc == 0 or shift == -math.inf:
            return LogComplex.zero()
        return LogComplex(shift + math.log(abs(acc)), math.atan2(acc.imag, acc.real))
    return LogComplex.from_complex(acc)


def _raise_bad(mask, args):
    idx = tuple(int(i[0]) for i in np.nonzero(mask))
    coords = []
    for j, a in enumerate(args):
        sub = [0] * a.ndim
        sub[j] = idx[j] if a.shape[j] > 1 else 0
        coords.append(complex(a[tuple(sub)]))
    raise IntegrandError(f"non-finite integrand at node {coords}")


def integrate_nd(f: Callable, spec: QuadratureSpec) -> QuadratureResult:
    """Integrate f over the tensor-product domain in spec.

    f receives one broadcastable array per dimension and returns integrand
    values, or their complex logarithms when spec.log_integrand is set.
    """
    factor = 1
    prev = None
    history = []
    value = None
    for step in range(spec.max_doublings + 1):
        rules = [d.rule(d.nodes * factor) for d in spec.dims]
        value = _tensor_sum(f, rules, spec.log_integrand, spec.chunk_points)
        if prev is not None:
            if value.log_mag == -math.inf and prev.log_mag == -math.inf:
                err, small = 0.0, True
            elif value.log_mag == -math.inf:
                err, small = math.inf, spec.atol > 0 and prev.log_mag <= math.log(spec.atol)
            else:
                err = value.rel_diff(prev)
                small = spec.atol > 0 and (err == 0 or math.log(err) + value.log_mag <= math.log(spec.atol))
            history.append(err)
            if err < spec.rtol or small:
                npts = int(np.prod([len(r[0]) for r in rules]))
                return QuadratureResult(value, err, npts, True, history)
        prev = value
        if step < spec.max_doublings:
            factor *= 2
    npts = int(np.prod([d.nodes * factor for d in spec.dims]))
    err = history[-1] if history else math.inf
    return QuadratureResult(value, err, npts, False, history)
