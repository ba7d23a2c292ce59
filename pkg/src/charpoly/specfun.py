"""Scalar special functions: log-gamma and modified Bessel functions of order 0 and 1.

Bessel routines accept floats or numpy arrays. Each comes with a log variant,
which stays finite far beyond the overflow point of the plain function
(I grows like e^x, K decays like e^-x).

Scheme:
  I_nu : power series for x <= 30, Hankel asymptotic series above.
  K_nu : series in (x/2)^2 with harmonic-number coefficients for x < 2,
         Steed/Temme continued fraction (scaled by e^x) for x >= 2.
"""

from __future__ import annotations

import math

import numpy as np

_I_SERIES_MAX = 30.0
_K_SERIES_MAX = 2.0
_EPS = 1e-17


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_factorial(k: int) -> float:
    if k < 0:
        raise ValueError("negative factorial")
    return math.lgamma(k + 1)


def _check_order(order: int) -> None:
    if order not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {order}")


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _unwrap(out, scalar):
    return float(out) if scalar else out


# ----------------------------------------------------------------------------
# I_nu


def _i_series(order: int, x: np.ndarray) -> np.ndarray:
    y = (x / 2.0) ** 2
    term = np.ones_like(x) if order == 0 else x / 2.0
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * y / (k * (k + order))
        total += term
        if np.all(term <= _EPS * total):
            break
    return total


def _i_asym_scaled(order: int, x: np.ndarray) -> np.ndarray:
    """e^{-x} I_nu(x) from the Hankel expansion; valid for x >= 30."""
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 60):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total += term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def bessel_i(order: int, x):
    """Modified Bessel function I_order(x), x >= 0."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("bessel_i requires x >= 0")
    out = np.empty_like(arr)
    small = arr <= _I_SERIES_MAX
    if np.any(small):
        out[small] = _i_series(order, arr[small])
    if np.any(~small):
        xb = arr[~small]
        with np.errstate(over="ignore"):
            out[~small] = _i_asym_scaled(order, xb) * np.exp(xb)
    return _unwrap(out, scalar)


def log_bessel_i(order: int, x):
    """ln I_order(x); -inf for I_1(0)."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("log_bessel_i requires x >= 0")
    out = np.empty_like(arr)
    small = arr <= _I_SERIES_MAX
    if np.any(small):
        with np.errstate(divide="ignore"):
            out[small] = np.log(_i_series(order, arr[small]))
    if np.any(~small):
        xb = arr[~small]
        out[~small] = xb + np.log(_i_asym_scaled(order, xb))
    return _unwrap(out, scalar)


# ----------------------------------------------------------------------------
# K_nu


def _k_series(order: int, x: np.ndarray) -> np.ndarray:
    y = (x / 2.0) ** 2
    lg = np.log(x / 2.0)
    if order == 0:
        # K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k y^k / (k!)^2
        term = np.ones_like(x)
        harmonic = 0.0
        tail = np.zeros_like(x)
        k = 0
        while True:
            k += 1
            term = term * y / (k * k)
            harmonic += 1.0 / k
            tail += harmonic * term
            if np.all(harmonic * term <= _EPS * np.abs(tail)):
                break
        return -(lg + np.euler_gamma) * _i_series(0, x) + tail
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1) + psi(k+2)] y^k / (k! (k+1)!)
    psi1 = -np.euler_gamma
    psi2 = 1.0 - np.euler_gamma
    term = np.ones_like(x)
    tail = (psi1 + psi2) * term
    k = 0
    while True:
        k += 1
        term = term * y / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        inc = (psi1 + psi2) * term
        tail += inc
        if np.all(np.abs(inc) <= _EPS * np.abs(tail)):
            break
    return 1.0 / x + lg * _i_series(1, x) - 0.25 * x * tail


def _k_cf_scaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(e^x K0(x), e^x K1(x)) by Steed's method for the second continued fraction.

    Order zero specialisation of the standard Temme/Steed CF2 scheme; converges
    quickly for x >= 2.
    """
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 10000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < _EPS * np.abs(s)):
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k(order: int, x):
    """Modified Bessel function of the second kind K_order(x), x > 0."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise ValueError("bessel_k requires x > 0")
    out = np.empty_like(arr)
    small = arr < _K_SERIES_MAX
    if np.any(small):
        out[small] = _k_series(order, arr[small])
    if np.any(~small):
        xb = arr[~small]
        scaled = _k_cf_scaled(xb)[order]
        with np.errstate(under="ignore"):
            out[~small] = scaled * np.exp(-xb)
    return _unwrap(out, scalar)


def log_bessel_k(order: int, x):
    """ln K_order(x), x > 0."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise ValueError("log_bessel_k requires x > 0")
    out = np.empty_like(arr)
    small = arr < _K_SERIES_MAX
    if np.any(small):
        out[small] = np.log(_k_series(order, arr[small]))
    if np.any(~small):
        xb = arr[~small]
        out[~small] = np.log(_k_cf_scaled(xb)[order]) - xb
    return _unwrap(out, scalar)
