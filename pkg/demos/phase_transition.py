"""Conformal measures on the renewal shift as beta decreases to log 2.

Run: python3 demos/phase_transition.py
"""

import math

from gcms.conformal import Constant, critical_beta_scan, measure_of_cylinder, normalize, run_all_checks
from gcms.convergence import auto_betas, converge_report, renewal_cylinders
from gcms.matrix import Root, renewal

ONE = Constant(1.0)


def main():
    A = renewal()
    print("scan of the normalizing series:")
    scan = critical_beta_scan(A, ONE, [0.5, math.log(2), 0.7, 1.0, 2.0])
    for row in scan.rows:
        print(f"  beta={row.beta:.6f}  {row.status}")
    print(f"  boundary in [{scan.lower:.12f}, {scan.upper:.12f}]")

    beta = 1.0
    mu = normalize(A, ONE, beta, Root.of(1))
    print(f"\natomic measure at beta={beta}:")
    for alpha in [(1,), (2, 1), (3, 2, 1)]:
        lo, hi = measure_of_cylinder(mu, alpha)
        print(f"  [{' '.join(map(str, alpha))}]  in [{lo:.15f}, {hi:.15f}]  exp(-|a| beta)={math.exp(-beta * len(alpha)):.15f}")
    for r in run_all_checks(A, mu, ONE, beta, 1e-10, cylinder_length=4, max_n=3):
        print(f"  {r.name:18s} passed={r.passed}  worst={r.worst:.3e}")

    print("\ngap to the limit measure 2^-|a| as beta decreases:")
    rep = converge_report(renewal_cylinders(range(1, 6)), auto_betas(0.3, 6))
    for b, g in zip(rep.betas, rep.max_gap):
        print(f"  beta={b:.6f}  max gap={g:.3e}")
    print(f"  monotone: {rep.monotone}")


if __name__ == "__main__":
    main()
