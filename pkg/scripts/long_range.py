"""Decay of correlations: pair decorrelation on G_3(n) and the boundary sandwich on H_3(d)."""

import argparse

import numpy as np

from rdelimits.empdist import atom_at_zero, kolmogorov_distance, make_pool
from rdelimits.harness import ExperimentConfig, pair_decorrelation
from rdelimits.models import Model
from rdelimits.rde import Objective
from rdelimits.solvers import LeafStatus, regular_tree_root_bonus
from rdelimits.weights import WeightSpec

IN, OUT = LeafStatus.FORCED_IN, LeafStatus.FORCED_OUT


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100])
    ap.add_argument("--graphs", type=int, default=500)
    ap.add_argument("--depths", type=int, nargs="+", default=list(range(4, 13)))
    ap.add_argument("--trees", type=int, default=10**4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    exp = WeightSpec.exponential()
    for n in args.sizes:
        cfg = ExperimentConfig(Model("regular", 3), Objective.INDEPENDENT_SET, exp, n, args.graphs, "bnb", args.seed)
        res = pair_decorrelation(cfg)
        print(f"G_3({n}): gap {res.gap:.4f} +- {res.stderr:.1e}")
    for d in args.depths:
        out = regular_tree_root_bonus(Objective.INDEPENDENT_SET, 3, d, exp, (IN, OUT), args.trees, np.random.default_rng([args.seed, d]))
        a, b = make_pool(out[IN]), make_pool(out[OUT])
        print(f"H_3({d}): Kolmogorov {kolmogorov_distance(a, b):.4f}  atom gap {abs(atom_at_zero(a) - atom_at_zero(b)):.4f}")


if __name__ == "__main__":
    main()
