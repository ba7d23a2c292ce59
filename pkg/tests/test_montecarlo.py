import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charpoly import exact_moments as em
from charpoly import montecarlo as mc
from charpoly.core import GeneratingPoint, RngSeed, SpectralPoint


def within_sigma(est, target, k=3.0):
    return abs(est.complex - complex(target)) <= k * est.std_error


def majority(check, seeds=(11, 12, 13)):
    """Statistical tests are rerun on three seeds and fail only if two or more fail."""
    fails = sum(0 if check(RngSeed(s)) else 1 for s in seeds)
    assert fails < 2, f"{fails} of {len(seeds)} seeds failed"


# ---------------------------------------------------------------- aggregate


def test_aggregate_constant():
    for est in mc.ESTIMATORS:
        r = mc.aggregate(np.full(500, 2.5 - 1j), est)
        assert r.complex == pytest.approx(2.5 - 1j, rel=1e-14)
        assert r.std_error == 0.0


def test_aggregate_alternating():
    S = 1000
    x = np.tile([1.0, -1.0], S // 2)
    r = mc.aggregate(x, "plain_mean")
    assert abs(r.complex) < 1e-15
    assert r.std_error == pytest.approx(1 / math.sqrt(S), rel=1e-12)


def test_aggregate_rejects():
    with pytest.raises(ValueError):
        mc.aggregate([], "plain_mean")
    with pytest.raises(ValueError):
        mc.aggregate(np.ones(50), "plain_mean")
    with pytest.raises(ValueError):
        mc.aggregate(np.ones(500), "mode")


def test_aggregate_heavy_tail():
    # location 1 plus symmetric Pareto noise with tail index 1.5 (finite mean, infinite variance);
    # 30 replicate streams from a fixed seed
    rng = np.random.default_rng(4)
    S = 100_000
    plain, mom = [], []
    for _ in range(30):
        x = 1 + rng.choice([-1, 1], S) * rng.pareto(1.5, S)
        plain.append(abs(mc.aggregate(x, "plain_mean").complex - 1))
        mom.append(abs(mc.aggregate(x, "median_of_means").complex - 1))
    assert max(plain) > 0.5
    assert max(mom) < 0.10


@given(st.lists(st.floats(-1e3, 1e3), min_size=100, max_size=400))
@settings(max_examples=30, deadline=None)
def test_aggregate_plain_mean_property(xs):
    r = mc.aggregate(np.array(xs), "plain_mean")
    assert r.complex.real == pytest.approx(np.mean(xs), abs=1e-9 * (1 + np.max(np.abs(xs))))
    assert r.std_error >= 0


def test_config_validation():
    with pytest.raises(ValueError):
        mc.McConfig(n_samples=50)
    with pytest.raises(ValueError):
        mc.McConfig(estimator="bogus")
    with pytest.raises(ValueError):
        mc.McConfig(chunk_size=0)


# ---------------------------------------------------------------- point-mass hooks


def test_point_mass_hooks():
    cfg = mc.McConfig(200, RngSeed(1), point_mass=True)
    sp = SpectralPoint(0.3, 0.2, 0.4)
    N, n = 5, 2
    assert mc.mc_k1(N, n, sp, cfg).complex == pytest.approx(sp.mu1 ** (-n * N), rel=1e-12)
    assert mc.mc_k2(N, n, sp, cfg).complex == pytest.approx((sp.mu1 * sp.mu2_star) ** (-n * N), rel=1e-12)
    assert mc.mc_positive_moment(N, n, sp, cfg).complex == pytest.approx(sp.mu1 ** (n * N), rel=1e-12)
    g = GeneratingPoint.local(0.1, 0.2, 0.3, 0.25)
    expect = (g.mu_f1 * g.mu_f2) ** N / (g.mu_b1 * g.mu_b2_star) ** N
    assert mc.mc_generating_function(N, g, cfg).complex == pytest.approx(expect, rel=1e-12)
    assert mc.mc_chiral_moment(N, n, 0.7, cfg).complex == pytest.approx(0.7 ** (-2 * n * N), rel=1e-12)
    for f in (mc.mc_k1, mc.mc_k2, mc.mc_positive_moment):
        assert f(N, n, sp, cfg).std_error == 0.0


def test_point_mass_large_N_log_domain():
    cfg = mc.McConfig(200, RngSeed(1), point_mass=True)
    sp = SpectralPoint(0.0, 0.0, 0.01)
    v = mc.mc_k1(400, 3, sp, cfg).value
    assert v.log_mag == pytest.approx(-3 * 400 * math.log(0.01), rel=1e-12)


# ---------------------------------------------------------------- preconditions


def test_regularisation_errors():
    cfg = mc.McConfig(200, RngSeed(1))
    with pytest.raises(ValueError):
        mc.mc_k1(4, 1, em.spectral_point(0.1, 0.0, 0.0), cfg)
    with pytest.raises(ValueError):
        mc.mc_chiral_moment(4, 1, 0.0, cfg)
    with pytest.raises(ValueError):
        GeneratingPoint(0.1 + 0.0j, 0.1 - 0.1j, 0.1, 0.2)


def test_small_delta_warns():
    cfg = mc.McConfig(200, RngSeed(1))
    with pytest.warns(RuntimeWarning):
        mc.mc_k1(20, 1, SpectralPoint(0.0, 0.0, 0.01), cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        mc.mc_k1(20, 1, SpectralPoint(0.0, 0.0, 0.1), cfg)


def test_per_sample_bound_holds():
    # the estimator asserts |Z^{-n}| <= delta^{-nN} on every sample; here it must not trip
    mc.mc_k1(6, 2, SpectralPoint(0.0, 0.0, 0.2), mc.McConfig(2000, RngSeed(3)))


# ---------------------------------------------------------------- determinism


def test_determinism_and_chunking():
    sp = SpectralPoint(0.3, 0.0, 0.3)
    a = mc.mc_k1(4, 1, sp, mc.McConfig(5000, RngSeed(9), chunk_size=1000))
    b = mc.mc_k1(4, 1, sp, mc.McConfig(5000, RngSeed(9), chunk_size=1000))
    assert a.value == b.value and a.std_error == b.std_error
    c = mc.mc_k1(4, 1, sp, mc.McConfig(5000, RngSeed(10), chunk_size=1000))
    assert c.value != a.value


# ---------------------------------------------------------------- statistics


def test_std_error_scaling():
    sp = SpectralPoint(0.3, 0.0, 0.5)
    ratios = []
    for rep in range(10):
        a = mc.mc_k1(4, 1, sp, mc.McConfig(2000, RngSeed(100 + rep), estimator="plain_mean")).std_error
        b = mc.mc_k1(4, 1, sp, mc.McConfig(4000, RngSeed(200 + rep), estimator="plain_mean")).std_error
        ratios.append(a / b)
    r = float(np.mean(ratios))
    assert math.sqrt(2) / 1.5 < r < math.sqrt(2) * 1.5


def test_k1_symmetry_imaginary_mu():
    # lambda -> -lambda: conj <Z(i delta)^{-n}> = (-1)^{nN} <Z(i delta)^{-n}>
    N, n = 5, 1
    sp = SpectralPoint(0.0, 0.0, 0.4)

    def check(seed):
        r = mc.mc_k1(N, n, sp, mc.McConfig(50_000, seed, estimator="plain_mean"))
        z = r.complex
        return abs(z.conjugate() - (-1) ** (n * N) * z) <= 3 * 2 * r.std_error

    majority(check)


def test_k1_matches_exact():
    sp = SpectralPoint(0.3, 0.0, 0.3)
    ex = em.k1_negative_exact(em.MomentParams(4, 1, sp)).complex
    majority(lambda s: within_sigma(mc.mc_k1(4, 1, sp, mc.McConfig(200_000, s)), ex))


def test_k1_large_mu():
    sp = SpectralPoint(50.0, 0.0, 0.1)
    r = mc.mc_k1(4, 2, sp, mc.McConfig(20_000, RngSeed(5)))
    assert r.value.rel_diff(sp.mu1 ** -8) < 0.01


def test_k2_real_positive_at_omega_zero():
    sp = SpectralPoint(0.2, 0.0, 0.3)
    r = mc.mc_k2(4, 1, sp, mc.McConfig(20_000, RngSeed(6)))
    assert r.complex.real > 0
    assert abs(r.complex.imag) < 3 * r.std_error


def test_k2_matches_exact():
    sp = SpectralPoint(0.2, 0.1, 0.3)
    ex = em.k2_negative_exact(em.MomentParams(4, 1, sp)).complex
    majority(lambda s: within_sigma(mc.mc_k2(4, 1, sp, mc.McConfig(200_000, s)), ex))


def test_positive_moment_matches_exact():
    sp = em.spectral_point(0.5, 0.0, 0.0)
    ex = em.k1_positive_exact(em.MomentParams(4, 1, sp)).complex
    majority(lambda s: within_sigma(mc.mc_positive_moment(4, 1, sp, mc.McConfig(100_000, s)), ex))


def test_positive_moment_odd_zero():
    sp = em.spectral_point(0.0, 0.0, 0.0)
    majority(lambda s: within_sigma(mc.mc_positive_moment(1, 1, sp, mc.McConfig(20_000, s, estimator="plain_mean")), 0))


def test_generating_trivial_is_exactly_one():
    g = GeneratingPoint.local(0.1, 0.2, 0.0, 0.3).trivial()
    r = mc.mc_generating_function(4, g, mc.McConfig(1000, RngSeed(2)))
    assert r.complex == 1.0
    assert r.std_error == 0.0


def test_generating_matches_exact():
    g = GeneratingPoint.local(0.0, 0.2, 0.2, 0.3)
    ex = em.generating_exact(4, g).complex
    majority(lambda s: within_sigma(mc.mc_generating_function(4, g, mc.McConfig(200_000, s)), ex))


def test_chiral_real_positive_and_matches_exact():
    ex = em.chiral_negative_exact(8, 1, 0.5).complex
    r = mc.mc_chiral_moment(8, 1, 0.5, mc.McConfig(20_000, RngSeed(4)))
    assert r.complex.imag == 0.0 and r.complex.real > 0
    majority(lambda s: within_sigma(mc.mc_chiral_moment(8, 1, 0.5, mc.McConfig(100_000, s)), ex))


def test_chiral_n2_matches_exact():
    ex = em.chiral_negative_exact(6, 2, 0.8).complex
    majority(lambda s: within_sigma(mc.mc_chiral_moment(6, 2, 0.8, mc.McConfig(100_000, s)), ex))
