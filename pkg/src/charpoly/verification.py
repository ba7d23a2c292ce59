"""Named verification suites that cross-check the three computational routes.

Each suite is a fixed, ordered list of checks. A check returns one or more
CheckRecord entries (expected value, obtained value, tolerance, pass flag).
Checks that rest on Monte Carlo follow a rerun policy: if the check fails on
the suite seed it is repeated on three derived seeds and fails only when two
or more of those fail. All randomness flows from the suite seed, so a rerun
with the same seed reproduces every number exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from . import asymptotics as A
from . import exact_moments as em
from . import matrix_integrals as mi
from . import montecarlo as mc
from . import specfun
from .core import GeneratingPoint, RngSeed, SpectralPoint
from .ensembles import sample_gue_batch

SUITES = ("identities", "moments", "asymptotics", "chiral", "generating")
RERUN_SEEDS = 3


@dataclass
class CheckRecord:
    check_id: str
    criterion: int
    params: dict
    expected: object
    got: object
    tolerance: float
    passed: bool
    runtime_ms: float = 0.0
    note: str = ""

    def as_dict(self, with_runtime: bool = True) -> dict:
        d = {"check_id": self.check_id, "criterion": self.criterion, "params": self.params,
             "expected": _plain(self.expected), "got": _plain(self.got), "tolerance": self.tolerance,
             "passed": bool(self.passed), "note": self.note}
        if with_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d


@dataclass
class VerificationReport:
    suite: str
    seed: int
    records: list = field(default_factory=list)
    tool_version: str = __version__

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def by_criterion(self) -> dict:
        out: dict = {}
        for r in self.records:
            out.setdefault(r.criterion, []).append(r)
        return out

    def as_dict(self, with_runtime: bool = True) -> dict:
        return {"suite": self.suite, "seed": self.seed, "tool_version": self.tool_version,
                "passed": self.passed, "records": [r.as_dict(with_runtime) for r in self.records]}


def _plain(v):
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    return v


class _Recorder:
    def __init__(self, criterion: int, seed: int):
        self.criterion = criterion
        self.seed = seed
        self.records: list[CheckRecord] = []
        self._t = time.perf_counter()

    def add(self, check_id, params, expected, got, tol, passed, note=""):
        now = time.perf_counter()
        self.records.append(CheckRecord(check_id, self.criterion, params, expected, got, tol, bool(passed),
                                        1000.0 * (now - self._t), note))
        self._t = now

    def rel(self, check_id, params, expected, got, tol, note=""):
        err = abs(complex(got) / complex(expected) - 1)
        self.add(check_id, params, expected, got, tol, err < tol, note or f"rel_err={err:.3e}")


def _with_reruns(seed: int, stream: int, check: Callable[[RngSeed], tuple]) -> tuple:
    """Run check(seed) -> (ok, expected, got, note); on failure apply the three-seed rerun policy."""
    ok, expected, got, note = check(RngSeed(seed, stream))
    if ok:
        return ok, expected, got, note
    fails = sum(0 if check(RngSeed(seed, stream + 1000 * (k + 1)))[0] else 1 for k in range(RERUN_SEEDS))
    return fails < 2, expected, got, note + f"; rerun: {fails}/{RERUN_SEEDS} seeds failed"


def _sigma_check(est, target, k=3.0):
    dev = abs(est.complex - complex(target))
    return dev <= k * est.std_error, f"dev={dev:.3e} se={est.std_error:.3e}"


# ---------------------------------------------------------------- criterion 1


def sampler_calibration(seed: int) -> list[CheckRecord]:
    rec = _Recorder(1, seed)
    N, S = 50, 10_000
    eigs = np.concatenate([np.linalg.eigvalsh(sample_gue_batch(N, 1000, RngSeed(seed, 1), c)) for c in range(S // 1000)])
    tr = np.sum(eigs * eigs, axis=1)
    se = float(np.std(tr, ddof=1) / math.sqrt(S))
    m = float(np.mean(tr))
    rec.add("gue_trace_square", {"N": N, "samples": S}, float(N), m, 3 * se, abs(m - N) <= 3 * se,
            f"se={se:.3e}")
    lam = np.sort(eigs.ravel())
    M = lam.size
    F = A.semicircle_cdf(lam)
    ks = float(max(np.max(np.arange(1, M + 1) / M - F), np.max(F - np.arange(M) / M)))
    rec.add("semicircle_kolmogorov", {"N": N, "samples": S}, 0.0, ks, 0.05, ks < 0.05)
    return rec.records


# ---------------------------------------------------------------- criteria 2, 3, 4, 7


def mc_vs_exact_k1(seed: int, n_samples: int = 1_000_000) -> list[CheckRecord]:
    rec = _Recorder(2, seed)
    sp = SpectralPoint.from_mu1(0.3 + 0.3j)
    for n in (1, 2):
        ex = em.k1_negative_exact(em.MomentParams(4, n, sp)).complex

        def check(s, n=n, ex=ex):
            est = mc.mc_k1(4, n, sp, mc.McConfig(n_samples, s))
            ok, note = _sigma_check(est, ex)
            return ok, ex, est.complex, note

        ok, e, g, note = _with_reruns(seed, 20 + n, check)
        rec.add(f"k1_mc_n{n}", {"N": 4, "n": n, "mu1": [0.3, 0.3], "samples": n_samples}, e, g, 3.0, ok, note)
    return rec.records


def large_mu_normalization(seed: int) -> list[CheckRecord]:
    rec = _Recorder(3, seed)
    sp = SpectralPoint(50.0, 0.0, 0.1)
    v = em.k1_negative_exact(em.MomentParams(4, 2, sp)).complex
    rec.rel("k1_large_mu", {"N": 4, "n": 2, "mu": 50.0, "delta": 0.1}, sp.mu1 ** -8, v, 0.01)
    return rec.records


def determinant_consistency(seed: int) -> list[CheckRecord]:
    rec = _Recorder(4, seed)
    sp = SpectralPoint.from_mu1(0.3 + 0.3j)
    for N in (4, 8):
        for n in (1, 2, 3):
            p = em.MomentParams(N, n, sp)
            a = em.k1_negative_exact(p).value
            b = em.k1_negative_determinant(p).value
            err = a.rel_diff(b)
            rec.add(f"phi_determinant_N{N}_n{n}", {"N": N, "n": n}, a.to_complex(), b.to_complex(), 1e-8,
                    err < 1e-8, f"rel_err={err:.3e}")
            c = em.k1_negative_determinant(p, family="shifted").value
            err = b.rel_diff(c)
            rec.add(f"monic_family_N{N}_n{n}", {"N": N, "n": n}, b.to_complex(), c.to_complex(), 1e-10,
                    err < 1e-10, f"rel_err={err:.3e}")
    return rec.records


def hs_route_equivalence(seed: int) -> list[CheckRecord]:
    rec = _Recorder(7, seed)
    sp = SpectralPoint(0.4, 0.1, 0.2)
    a = mi.hs_route_k2_n1(5, sp).value
    b = em.k2_negative_exact(em.MomentParams(5, 1, sp)).value
    err = a.rel_diff(b)
    rec.add("hs_route_vs_k2", {"N": 5, **sp.as_dict()}, b.to_complex(), a.to_complex(), 1e-6, err < 1e-6,
            f"rel_err={err:.3e}")
    return rec.records


# ---------------------------------------------------------------- criteria 5, 6


def k1_asymptotic_convergence(seed: int) -> list[CheckRecord]:
    rec = _Recorder(5, seed)
    errs = {}
    for N in (25, 100):
        sp = SpectralPoint(0.0, 0.0, 1.0 / N)
        e = em.k1_negative_exact(em.MomentParams(N, 1, sp)).value
        a = A.k1_asymptotic(N, 1, sp).value
        errs[N] = e.mag_rel_diff(a)
    rec.add("k1_asymptotic_N100", {"N": 100, "n": 1, "mu": 0.0, "delta": 0.01}, 0.0, errs[100], 0.05,
            errs[100] < 0.05, "magnitude relative error")
    rec.add("k1_asymptotic_trend", {"N": [25, 100]}, errs[25] / 2, errs[100], 0.0, errs[100] < errs[25] / 2,
            "error(N=100) < error(N=25)/2")
    return rec.records


def universal_ratio(seed: int) -> list[CheckRecord]:
    rec = _Recorder(6, seed)
    N = 200
    sp = SpectralPoint(0.0, 0.0, 1.0 / N)
    k2 = em.k2_negative_exact(em.MomentParams(N, 1, sp)).value
    k1 = em.k1_negative_exact(em.MomentParams(N, 1, sp)).value
    r = (k2 / (k1 * k1.conj())).to_complex()
    rec.rel("k2_ratio", {"N": N, "n": 1, "mu": 0.0, "omega": 0.0, "delta": 1.0 / N},
            A.moment_ratio_limit(1, 0.0, 0.0, 1.0 / N), r, 0.10)
    return rec.records


# ---------------------------------------------------------------- criteria 8, 9


def identity_checks(seed: int) -> list[CheckRecord]:
    rec = _Recorder(8, seed)
    rng = RngSeed(seed, 80).generator()
    for p in (0, 1):
        Q = mi.random_positive_definite(2, rng)
        Q = mi.PositiveDefiniteHermitian(Q.entries / np.trace(Q.entries).real * 2 + 0.3 * np.eye(2))
        v = mi.ingham_siegel_first_value(p, Q).to_complex()
        b = mi.ingham_siegel_first_bruteforce_n2(p, Q).value.to_complex()
        rec.rel(f"ingham_siegel_first_n2_p{p}", {"n": 2, "p": p}, v, b, 1e-4)
    mu = 0.2 + 0.5j
    for N in (2, 3, 5):
        v = mi.ingham_siegel_second_value(N, mu, [[1.0]]).to_complex()
        b = mi.ingham_siegel_second_bruteforce_n1(N, mu, 1.0)
        rec.rel(f"ingham_siegel_second_n1_N{N}", {"N": N, "n": 1, "mu": [mu.real, mu.imag], "q": 1.0}, v, b, 1e-4)
    z = mi.ingham_siegel_second_value(3, mu, np.diag([1.0, -0.5])).to_complex()
    rec.add("ingham_siegel_second_negative_zero", {"N": 3, "Q": "diag(1,-0.5)"}, 0.0, z, 0.0, z == 0)
    for n in (1, 2, 3):
        for t in (0.5, 1.0, 2.0):
            rec.rel(f"selberg_n{n}_t{t}", {"n": n, "t": t}, mi.selberg_value(n, t), mi.selberg_bruteforce(n, t),
                    1e-10)
    for n, p, beta in ((1, 3, 1.5 + 0.5j), (2, 0, 1.0), (2, 1, 1.0), (2, 2, 0.8 - 0.6j)):
        rec.rel(f"aux_n{n}_p{p}", {"n": n, "p": p, "beta": [beta.real, beta.imag]},
                mi.aux_identity_value(n, p, beta).to_complex(), mi.aux_identity_bruteforce(n, p, beta), 1e-8)
    lam, q, beta = [0.0, 1.0], [0.0, 1.0], 1.0
    hv = mi.hciz_value(lam, q, beta)

    def hciz_check(s):
        est = mi.hciz_haar_mc(lam, q, beta, 100_000, s)
        ok, note = _sigma_check(est, hv)
        return ok, hv, est.complex, note

    ok, e, g, note = _with_reruns(seed, 81, hciz_check)
    rec.add("hciz_n2_haar", {"lam": lam, "q": q, "beta": beta, "samples": 100_000}, e, g, 3.0, ok, note)
    crng = RngSeed(seed, 82).generator()
    for n in (1, 2, 3):
        x = crng.uniform(0.1, 3.0, n)
        y = crng.uniform(-3.0, -0.1, n)
        rec.rel(f"cauchy_n{n}", {"n": n}, mi.cauchy_determinant_direct(x, y), mi.cauchy_determinant_value(x, y),
                1e-10)
    for sp in (SpectralPoint(0.2, 0.0, 0.4), SpectralPoint(0.2, 0.3, 0.2)):
        v = mi.coset_integral_value(sp, [1.0], [-1.0], 3).to_complex()
        b = mi.coset_integral_bruteforce_n1(sp, 1.0, -1.0, 3)
        rec.rel(f"coset_n1_omega{sp.omega}", {"N": 3, "q1": 1.0, "q2": -1.0, **sp.as_dict()}, v, b, 1e-3)
    return rec.records


def ql_structure(seed: int, count: int = 1000) -> list[CheckRecord]:
    rec = _Recorder(9, seed)
    for n in (1, 2, 3):
        rng = RngSeed(seed, 90 + n).generator()
        L = mi.SignatureMatrix(n)
        worst_imag = worst_res = 0.0
        sig_ok = True
        for _ in range(count):
            Q = mi.random_positive_definite(2 * n, rng)
            ev = np.linalg.eigvals(Q.entries @ L.matrix)
            worst_imag = max(worst_imag, float(np.max(np.abs(ev.imag)) / max(1.0, float(np.max(np.abs(ev))))))
            d = mi.ql_spectral_decomposition(Q, L)
            sig_ok &= d.signature == (n, n)
            worst_res = max(worst_res, d.residual)
        params = {"n": n, "count": count}
        rec.add(f"ql_real_n{n}", params, 0.0, worst_imag, 1e-9, worst_imag < 1e-9, "max |Im eigenvalue|")
        rec.add(f"ql_signature_n{n}", params, [n, n], [n, n] if sig_ok else "mismatch", 0.0, sig_ok)
        rec.add(f"ql_residual_n{n}", params, 0.0, worst_res, 1e-8, worst_res < 1e-8, "max |T^+ L T - L|")
    return rec.records


# ---------------------------------------------------------------- criterion 10


def chiral_checks(seed: int) -> list[CheckRecord]:
    rec = _Recorder(10, seed)
    ex = em.chiral_negative_exact(8, 1, 0.5).complex

    def check(s):
        est = mc.mc_chiral_moment(8, 1, 0.5, mc.McConfig(100_000, s))
        ok, note = _sigma_check(est, ex)
        return ok, ex, est.complex, note

    ok, e, g, note = _with_reruns(seed, 100, check)
    rec.add("chiral_mc_vs_quadrature", {"N": 8, "n": 1, "m": 0.5, "samples": 100_000}, e, g, 3.0, ok, note)
    for x in (0.5, 1.0, 2.0):
        rec.rel(f"chiral_limit_bessel_x{x}", {"n": 1, "x": x}, 2 * specfun.bessel_k(0, x),
                A.chiral_limit_moment(1, x).complex, 1e-8)
    N = 300
    ref = em.chiral_generating_exact(N, 1.0 / N, 1.0 / N).complex.real
    bref = A.chiral_quenched_bessel(1.0, 1.0)
    for xf, xb in ((1.0, 0.8), (0.5, 1.5), (2.0, 1.0), (3.0, 2.0)):
        v = em.chiral_generating_exact(N, xf / N, xb / N).complex.real / ref
        b = A.chiral_quenched_bessel(xf, xb) / bref
        rec.rel(f"chiral_generating_vs_bessel_xf{xf}_xb{xb}", {"N": N, "x_f": xf, "x_b": xb, "normalized_at": [1.0, 1.0]},
                b, v, 0.05)
    return rec.records


# ---------------------------------------------------------------- criterion 11


def generating_checks(seed: int) -> list[CheckRecord]:
    rec = _Recorder(11, seed)
    g0 = GeneratingPoint.local(0.1, 0.2, 0.0, 0.3).trivial()
    v = em.generating_exact(4, g0).complex
    rec.rel("generating_trivial_quadrature", {"N": 4}, 1.0, v, 1e-10)
    m = mc.mc_generating_function(4, g0, mc.McConfig(1000, RngSeed(seed, 110))).complex
    rec.add("generating_trivial_mc", {"N": 4}, 1.0, m, 0.0, m == 1.0)
    for i, (mu, wb, wf, d) in enumerate(((0.0, 0.2, 0.2, 0.3), (0.1, 0.4, 0.1, 0.3))):
        g = GeneratingPoint.local(mu, wb, wf, d)
        ex = em.generating_exact(4, g).complex

        def check(s, g=g, ex=ex):
            est = mc.mc_generating_function(4, g, mc.McConfig(200_000, s))
            ok, note = _sigma_check(est, ex)
            return ok, ex, est.complex, note

        ok, e, got, note = _with_reruns(seed, 111 + i, check)
        rec.add(f"generating_mc_{i}", {"N": 4, "mu": mu, "omega_b": wb, "omega_f": wf, "delta": d, "samples": 200_000},
                e, got, 3.0, ok, note)
    # local regime at N=64; both sides equal 1 at omega_f = omega_b, which is the normalisation point
    N = 64
    fits = {k: 0.0 for k in (0.5, 1.0, 2.0)}
    for mu in (0.0, 0.5):
        for c in (0.3, 0.6):
            w, d = 2 * math.pi * c / N, 0.1 / N
            for r in (0.5, 0.0, 1.5):
                e = em.generating_exact(N, GeneratingPoint.local(mu, w, r * w, d)).complex
                a = A.generating_asymptotic(N, mu, w, r * w, d)
                rec.rel(f"generating_asymptotic_mu{mu}_c{c}_r{r}",
                        {"N": N, "mu": mu, "omega_b": w, "omega_f": r * w, "delta": d}, e, a, 0.10)
                for k in fits:
                    a_k = A.generating_asymptotic(N, mu, k * w, k * r * w, k * d)
                    fits[k] = max(fits[k], abs(e / a_k - 1))
    best = min(fits, key=fits.get)
    rec.add("generating_phase_frequency_fit", {"N": N, "candidates": sorted(fits)}, 1.0, best, 0.0, best == 1.0,
            "max mismatch per frequency scale: " + ", ".join(f"{k}: {fits[k]:.3f}" for k in sorted(fits)))
    return rec.records


# ---------------------------------------------------------------- suites

SUITE_CHECKS: dict[str, tuple] = {
    "identities": (identity_checks, ql_structure),
    "moments": (sampler_calibration, mc_vs_exact_k1, large_mu_normalization, determinant_consistency,
                hs_route_equivalence),
    "asymptotics": (k1_asymptotic_convergence, universal_ratio),
    "chiral": (chiral_checks,),
    "generating": (generating_checks,),
}


def run_suite(name: str, seed: int = 0) -> VerificationReport:
    if name == "all":
        names = SUITES
    elif name in SUITE_CHECKS:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    report = VerificationReport(name, int(seed))
    for s in names:
        for check in SUITE_CHECKS[s]:
            report.records.extend(check(int(seed)))
    return report
