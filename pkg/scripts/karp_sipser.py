"""Leaf-removal matchings on G(n, c/n) against the closed-form constants."""

import argparse
import math

import numpy as np

from rdelimits.closedform import karp_sipser_constants
from rdelimits.graphs import gen_gnp
from rdelimits.solvers import karp_sipser, karp_sipser_matching


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**5)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.5, 1.0, 2.0, math.e])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for c in args.rates:
        ks = karp_sipser_constants(c)
        sizes, rems = [], []
        for t in range(args.trials):
            g = gen_gnp(args.n, c, np.random.default_rng([args.seed, t]))
            sizes.append(karp_sipser_matching(g).cardinality / g.n)
            rems.append(karp_sipser(g).remainder.n / g.n)
        print(
            f"c={c:.3f}: matching/n {np.mean(sizes):.5f} (limit {ks.matching_limit:.5f}) "
            f"remainder/n {np.mean(rems):.4f}  matching+indset-1 = {ks.matching_limit + ks.indset_limit - 1:.1e}"
        )


if __name__ == "__main__":
    main()
