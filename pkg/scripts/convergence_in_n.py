"""How trusted eigenvalues and zeta values settle as the truncation N grows.

Usage: python scripts/convergence_in_n.py [--seed 0] [--out convergence.csv]
"""
import argparse
import csv
import sys

from steklov import dtn, zeta
from steklov.fixtures import random_factor


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="8,16,24,32,48,64,96,128")
    p.add_argument("--out")
    args = p.parse_args(argv)

    a = random_factor(args.seed)
    sizes = [int(x) for x in args.sizes.split(",")]
    ref_n = max(sizes)
    ref = dtn.spectrum(a, ref_n).eigenvalues
    ref_z = {s: zeta.zeta_diff(a, s, ref_n).diff for s in (-2.0, 2.0)}

    rows = []
    for n in sizes:
        lam = dtn.spectrum(a, n).eigenvalues
        k = n // 2 + 1
        rows.append({
            "N": n,
            "max_eig_gap_trusted": float(abs(lam[:k] - ref[:k]).max()),
            "zeta_gap_s-2": abs(zeta.zeta_diff(a, -2.0, n).diff - ref_z[-2.0]),
            "zeta_gap_s2": abs(zeta.zeta_diff(a, 2.0, n).diff - ref_z[2.0]),
        })

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
