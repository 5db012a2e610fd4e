"""Bracket gap of the population dynamics across the uniqueness thresholds."""

import argparse
import math

import numpy as np

from rdelimits.models import Offspring
from rdelimits.rde import Objective, OperatorSpec, bracket_iterate, uniqueness_verdict
from rdelimits.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pool", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cases = [(f"regular:{r}", Offspring.fixed(r - 1)) for r in range(2, 9)]
    cases += [(f"poisson:{c:.3f}", Offspring.pois(c)) for c in np.linspace(2 * math.e - 1, 2 * math.e + 1, 5)]
    for label, offspring in cases:
        op = OperatorSpec(Objective.INDEPENDENT_SET, offspring, WeightSpec.exponential())
        br = bracket_iterate(op, args.steps, args.pool, np.random.default_rng(args.seed))
        verdict = uniqueness_verdict(br, 0.02)
        print(f"{label:>16}  {str(verdict):>12}  gap {br.gap:.4f}")


if __name__ == "__main__":
    main()
