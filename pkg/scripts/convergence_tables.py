"""Relative error of the large-N formulas against exact quadrature, as CSV.

    python3 scripts/convergence_tables.py --N 25 50 100 200 400
"""

import argparse

from charpoly import asymptotics as A
from charpoly import exact_moments as em
from charpoly.core import SpectralPoint


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    ap.add_argument("--mu", type=float, default=0.0)
    ap.add_argument("--omega", type=float, default=0.0, help="omega in units of 1/N")
    ap.add_argument("--delta", type=float, default=1.0, help="delta in units of 1/N")
    ap.add_argument("--n", type=int, default=1)
    args = ap.parse_args()
    print("N,n,k1_rel_err,k1_mag_rel_err,k2_rel_err,ratio_exact_re,ratio_exact_im,ratio_limit_re,ratio_limit_im")
    for N in args.N:
        sp = SpectralPoint(args.mu, args.omega / N, args.delta / N)
        p = em.MomentParams(N, args.n, sp)
        e1 = em.k1_negative_exact(p).value
        a1 = A.k1_asymptotic(N, args.n, sp).value
        row = [N, args.n, e1.rel_diff(a1), e1.mag_rel_diff(a1)]
        if args.n <= 2 and N >= 2 * args.n:
            e2 = em.k2_negative_exact(p).value
            a2 = A.k2_asymptotic(N, args.n, sp).value
            conj_pt = SpectralPoint(args.mu, -args.omega / N, args.delta / N)
            e1c = em.k1_negative_exact(em.MomentParams(N, args.n, conj_pt)).value.conj()
            ratio = (e2 / (e1 * e1c)).to_complex()
            lim = A.moment_ratio_limit(args.n, args.mu, args.omega / N, args.delta / N)
            row += [e2.rel_diff(a2), ratio.real, ratio.imag, complex(lim).real, complex(lim).imag]
        print(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


if __name__ == "__main__":
    main()
