"""Fit the oscillation frequency of the large-N generating function.

The local-regime asymptotic oscillates like exp(i N pi rho(mu) omega). This
script rescales (omega_b, omega_f, delta) by a trial factor k and reports, for
each k, the worst relative mismatch against the exact finite-N value. The
convention in use corresponds to k = 1.

    python3 scripts/fit_generating_frequency.py --N 64 --scales 0.5 0.75 1 1.5 2
"""

import argparse
import math

from charpoly import asymptotics as A
from charpoly import exact_moments as em
from charpoly.core import GeneratingPoint


def mismatch(N, k, mus, cs, ratios, delta_scale):
    worst = 0.0
    for mu in mus:
        for c in cs:
            w = 2 * math.pi * c / N
            d = delta_scale / N
            for r in ratios:
                e = em.generating_exact(N, GeneratingPoint.local(mu, w, r * w, d)).complex
                a = A.generating_asymptotic(N, mu, k * w, k * r * w, k * d)
                worst = max(worst, abs(e / a - 1))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--scales", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.5, 2.0])
    ap.add_argument("--mu", type=float, nargs="+", default=[0.0, 0.5])
    ap.add_argument("--c", type=float, nargs="+", default=[0.3, 0.6], help="omega_b in units of 2 pi / N")
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.0, 0.5, 1.5], help="omega_f / omega_b")
    ap.add_argument("--delta", type=float, default=0.1, help="delta in units of 1/N")
    args = ap.parse_args()
    print("scale,max_rel_mismatch")
    res = {k: mismatch(args.N, k, args.mu, args.c, args.ratios, args.delta) for k in args.scales}
    for k, v in res.items():
        print(f"{k},{v:.6g}")
    print(f"# best scale: {min(res, key=res.get)}")


if __name__ == "__main__":
    main()
