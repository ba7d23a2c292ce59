import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charpoly import quadrature as qd


def test_gl_two_point():
    x, w = qd.gauss_legendre_rule(2, -1, 1)
    assert x == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)])
    assert w == pytest.approx([1, 1])


def test_gl_cubic_exact():
    x, w = qd.gauss_legendre_rule(2, 0, 1)
    assert np.sum(w * x ** 3) == pytest.approx(0.25, abs=1e-15)


def test_gl_sine():
    x, w = qd.gauss_legendre_rule(20, 0, math.pi)
    assert np.sum(w * np.sin(x)) == pytest.approx(2.0, abs=1e-12)


def test_gl_bad_input():
    with pytest.raises(ValueError):
        qd.gauss_legendre_rule(0, 0, 1)
    with pytest.raises(ValueError):
        qd.gauss_legendre_rule(3, 1, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(0, 59))
def test_gl_polynomial_exactness(k, m):
    if m > 2 * k - 1:
        return
    x, w = qd.gauss_legendre_rule(k, 0.0, 2.0)
    assert np.sum(w * x ** m) == pytest.approx(2.0 ** (m + 1) / (m + 1), rel=1e-12)


def test_gh_rules():
    x, w = qd.gauss_hermite_rule(1)
    assert np.sum(w) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    x, w = qd.gauss_hermite_rule(2)
    assert np.sum(w * x ** 2) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    x, w = qd.gauss_hermite_rule(4)
    assert np.sum(w * x ** 6) == pytest.approx(15 * math.sqrt(math.pi) / 8, rel=1e-13)


def test_constant_on_square():
    spec = qd.QuadratureSpec((qd.Dim.finite(0, 1, 8), qd.Dim.finite(0, 1, 8)), rtol=1e-12)
    res = qd.integrate_nd(lambda x, y: np.ones(np.broadcast(x, y).shape), spec)
    assert res.value.to_complex() == pytest.approx(1.0, abs=1e-15)
    assert res.converged


def test_full_period():
    spec = qd.QuadratureSpec((qd.Dim.finite(0, 2 * math.pi, 32),), rtol=1e-8, atol=1e-10)
    res = qd.integrate_nd(lambda q: np.exp(1j * q), spec)
    assert abs(res.value.to_complex()) < 1e-10


def test_selberg_two():
    spec = qd.QuadratureSpec((qd.Dim.full_line(12.0, 64), qd.Dim.full_line(12.0, 64)), rtol=1e-10)
    res = qd.integrate_nd(lambda a, b: (a - b) ** 2 * np.exp(-(a * a + b * b) / 2), spec)
    assert res.value.to_complex() == pytest.approx(4 * math.pi, rel=1e-10)


def test_log_integrand_matches_linear():
    spec = qd.QuadratureSpec((qd.Dim.half_line(60.0, 64),), rtol=1e-12)
    lin = qd.integrate_nd(lambda q: q ** 3 * np.exp(-q), spec)
    lg = qd.integrate_nd(lambda q: 3 * np.log(q) - q, spec.with_log())
    assert lin.value.to_complex() == pytest.approx(6.0, rel=1e-12)
    assert lg.value.rel_diff(lin.value) < 1e-13


def test_log_integrand_huge_scale():
    spec = qd.QuadratureSpec((qd.Dim.half_line(2000.0, 200),), rtol=1e-10, log_integrand=True)
    res = qd.integrate_nd(lambda q: 400 * np.log(q) - q, spec)
    assert res.value.log_mag == pytest.approx(math.lgamma(401), rel=1e-12)


def test_rotated_ray_same_value():
    f = lambda q: q ** 2 * np.exp(-q * q / 2 + 1j * 3 * q)
    a = qd.integrate_nd(f, qd.QuadratureSpec((qd.Dim.half_line(12.0, 128),), rtol=1e-10))
    b = qd.integrate_nd(f, qd.QuadratureSpec((qd.Dim.half_line(12.0, 128, angle=0.6),), rtol=1e-10))
    assert b.value.rel_diff(a.value) < 1e-9


def test_nonfinite_integrand_reports_node():
    spec = qd.QuadratureSpec((qd.Dim.finite(-1, 1, 9),))
    with pytest.raises(qd.IntegrandError) as err:
        qd.integrate_nd(lambda x: 1 / x, spec)
    assert "0" in str(err.value)


def test_unconverged_flag():
    spec = qd.QuadratureSpec((qd.Dim.finite(0, 1, 8),), rtol=1e-14, max_doublings=1)
    res = qd.integrate_nd(lambda x: np.sin(200 * x), spec)
    assert not res.converged
    assert np.isfinite(res.value.log_mag)


def test_refinement_error_decreases():
    spec = qd.QuadratureSpec((qd.Dim.finite(0, 3, 8),), rtol=1e-15, max_doublings=3)
    res = qd.integrate_nd(lambda x: np.exp(np.sin(3 * x)), spec)
    h = [e for e in res.history if e > 1e-14]
    assert all(b < a for a, b in zip(h, h[1:]))


def test_spec_invariants():
    with pytest.raises(ValueError):
        qd.Dim.finite(0, 1, 4)
    with pytest.raises(ValueError):
        qd.Dim.half_line(-1.0, 16)
    with pytest.raises(ValueError):
        qd.QuadratureSpec((qd.Dim.finite(0, 1, 8),), rtol=0.5)
    with pytest.raises(ValueError):
        qd.QuadratureSpec(tuple(qd.Dim.finite(0, 1, 8) for _ in range(5)))


def test_chunked_4d_matches_unchunked():
    dims = tuple(qd.Dim.finite(0, 1, 10) for _ in range(4))
    f = lambda a, b, c, d: np.exp(a * b - c * d) * (1 + 1j * a * d)
    big = qd.integrate_nd(f, qd.QuadratureSpec(dims, max_doublings=0))
    small = qd.integrate_nd(f, qd.QuadratureSpec(dims, max_doublings=0, chunk_points=77))
    assert small.value.rel_diff(big.value) < 1e-13


def test_oscillation_guard():
    assert qd.oscillation_nodes(10, 0.5, 2.0) == 8 + math.ceil(10 / math.pi)
    assert qd.oscillation_nodes(10, 0.0, 2.0) == 8
