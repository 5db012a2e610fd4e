"""Print the closed-form limits next to population-dynamics estimates."""

import argparse

import numpy as np

from rdelimits.cli import limit_grid, limit_row
from rdelimits.rde import Objective, OperatorSpec, Quantity, VerdictKind, bracket_iterate, limit_from_pool, uniqueness_verdict
from rdelimits.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pool", type=int, default=50_000)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--mc-samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'model':>22} {'obj':>5} {'unique':>6} {'formula':>8} {'pool':>8} {'stderr':>7}")
    for model in limit_grid():
        for objective in Objective:
            row = limit_row(model, objective)
            op = OperatorSpec(objective, model.offspring, WeightSpec.exponential())
            verdict = uniqueness_verdict(bracket_iterate(op, args.steps, args.pool, rng), 0.02)
            pool, se = "", ""
            if verdict.kind is VerdictKind.UNIQUE:
                est = limit_from_pool(op, verdict.fixed_point, model.root_degree, Quantity.WEIGHT, args.mc_samples, rng)
                pool, se = f"{est.value:.4f}", f"{est.stderr:.4f}"
            formula = "" if row["weight_limit"] is None else f"{row['weight_limit']:.4f}"
            print(f"{row['model']:>22} {row['objective']:>5} {str(row['unique']):>6} {formula:>8} {pool:>8} {se:>7}")


if __name__ == "__main__":
    main()
