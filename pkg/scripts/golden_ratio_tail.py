#!/usr/bin/env python3
"""Tabulate q * |q*phi - p| at the continued-fraction convergents of
phi = (sqrt(5) - 1) / 2 and compare with the library's truncated minimum
over growing search windows.

The convergent denominators are the Fibonacci numbers; the products
alternate around 1/sqrt(5) and the lower branch climbs toward it, so the
infimum over any tail [N, inf) settles near 0.447.

Usage:
    python3 scripts/golden_ratio_tail.py --q-limit 1000000
"""

import argparse
import decimal
import math

from ba_lab.core import AffineSystem
from ba_lab.forms import truncated_constant

PHI = (math.sqrt(5.0) - 1.0) / 2.0


def convergent_products(q_limit, prec=60):
    decimal.getcontext().prec = prec
    phi = (decimal.Decimal(5).sqrt() - 1) / 2
    rows = []
    p0, q0, p1, q1 = 1, 0, 0, 1
    while True:
        p0, q0, p1, q1 = p1, q1, p0 + p1, q0 + q1
        if q1 > q_limit:
            return rows
        rows.append((p1, q1, q1 * abs(q1 * phi - p1)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q-limit", type=int, default=10**6)
    ap.add_argument("--tail-starts", type=int, nargs="+",
                    default=[1, 10, 100, 1000])
    args = ap.parse_args()

    inv_sqrt5 = 1 / math.sqrt(5.0)
    print(f"1/sqrt(5) = {inv_sqrt5:.12f}\n")
    print(f"{'p':>8} {'q':>8} {'q*|q*phi-p|':>16} side")
    for p, q, prod in convergent_products(args.q_limit):
        side = "below" if float(prod) < inv_sqrt5 else "above"
        print(f"{p:>8} {q:>8} {float(prod):>16.12f} {side}")

    system = AffineSystem.one_dim(PHI, 0.0)
    print(f"\ntruncated minima of q*|q*phi - p| over [N, {args.q_limit}]:")
    for n_lo in args.tail_starts:
        out = truncated_constant(system, n_lo, args.q_limit)
        print(f"  N={n_lo:>5}: {out.value:.12f} "
              f"(witness q={out.witness.q[0]}, p={out.witness.p[0]})")


if __name__ == "__main__":
    main()
