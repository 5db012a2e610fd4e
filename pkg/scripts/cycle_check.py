"""Exact independent sets and matchings on long weighted cycles (limit 2/3)."""

import argparse
import time

import numpy as np

from rdelimits.graphs import Target, assign_weights, gen_cycle
from rdelimits.solvers import mwis_forest_unicyclic, mwm_forest_unicyclic
from rdelimits.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = gen_cycle(args.n)
    for k in range(args.seeds):
        rng = np.random.default_rng([args.seed, k])
        t0 = time.perf_counter()
        ind = mwis_forest_unicyclic(assign_weights(g, WeightSpec.exponential(), Target.NODES, rng)).value / g.n
        match = mwm_forest_unicyclic(assign_weights(g, WeightSpec.exponential(), Target.EDGES, rng)).value / g.n
        print(f"seed {k}: independent set {ind:.5f}  matching {match:.5f}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
