"""G(n, c/n) below the giant-component threshold: exact solves against the formulas."""

import argparse

from rdelimits.harness import ExperimentConfig, run_experiment
from rdelimits.models import Model
from rdelimits.rde import Objective
from rdelimits.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**5)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.3, 0.5, 0.8])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for c in args.rates:
        for objective in Objective:
            cfg = ExperimentConfig(Model("poisson", c), objective, WeightSpec.exponential(), args.n, args.trials, "dp", args.seed)
            row = run_experiment(cfg)
            print(
                f"c={c:<4} {objective.value:>5}: {row.mean_value:.5f} +- {row.stderr_value:.5f} "
                f"theory {row.theory_value:.5f} z={row.z_value:+.2f}"
            )


if __name__ == "__main__":
    main()
