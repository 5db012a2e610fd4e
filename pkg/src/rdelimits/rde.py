"""Population dynamics for the bonus recursions.

A distribution of bonuses is carried as a pool of particles.  One
application of an operator builds every new particle from a fresh weight (one
per child for matchings), a fresh offspring count, and children resampled
with replacement from the current pool:

* independent sets:  ``B' = max(0, W - sum_i B_i)``
* matchings:         ``B' = max(0, max_i (W_i - B_i))``

The two-sided iteration starts one pool at the all-zero law and one at the
top law (``F_w``, or the law of a maximum of ``k`` weights for matchings).
Both pools are driven by the same random numbers at every application.
Resampling picks the same ranks in the two sorted pools, so the coupling is
monotone: dominance between the pools is preserved particle by particle and
the reported gap has no independent sampling noise in it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from rdelimits.empdist import EmpiricalDist, kolmogorov_distance, make_pool, zeros_pool
from rdelimits.models import Offspring
from rdelimits.weights import WeightSpec, sample_max_weight, sample_weight


class Objective(enum.Enum):
    INDEPENDENT_SET = "ind"
    MATCHING = "match"


def parse_objective(text: str) -> Objective:
    try:
        return Objective(text.strip().lower())
    except ValueError:
        raise ValueError(f"objective must be 'ind' or 'match', got {text!r}") from None


class Quantity(enum.Enum):
    WEIGHT = "weight"
    CARDINALITY = "cardinality"


@dataclass(frozen=True)
class OperatorSpec:
    objective: Objective
    offspring: Offspring
    weight: WeightSpec


@dataclass
class FixedPointBracket:
    lower: EmpiricalDist
    upper: EmpiricalDist
    iterations: int
    gap: float
    gaps: list = field(default_factory=list)


class VerdictKind(enum.Enum):
    UNIQUE = "Unique"
    NON_UNIQUE = "NonUnique"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class Verdict:
    kind: VerdictKind
    gap: float
    fixed_point: EmpiricalDist | None = None

    def __str__(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    stderr: float
    samples: int
    quantity: Quantity


def _group_owner(counts: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(counts.size), counts)


def _group_max(values: np.ndarray, counts: np.ndarray, empty: float) -> np.ndarray:
    out = np.full(counts.size, empty, dtype=float)
    nz = counts > 0
    if values.size:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        out[nz] = np.maximum.reduceat(values, starts[nz])
    return out


def _apply(op: OperatorSpec, samples: np.ndarray, n_out: int, rng: np.random.Generator) -> np.ndarray:
    n_in = samples.size
    if op.offspring.poisson:
        counts = rng.poisson(op.offspring.value, n_out)
        total = int(counts.sum())
        kids = samples[rng.integers(0, n_in, total)]
        if op.objective is Objective.INDEPENDENT_SET:
            w = sample_weight(op.weight, rng, n_out)
            sums = np.bincount(_group_owner(counts), weights=kids, minlength=n_out)
            return np.maximum(0.0, w - sums)
        edge_w = sample_weight(op.weight, rng, total)
        return np.maximum(0.0, _group_max(edge_w - kids, counts, 0.0))
    k = int(op.offspring.value)
    kids = samples[rng.integers(0, n_in, (n_out, k))]
    if op.objective is Objective.INDEPENDENT_SET:
        w = sample_weight(op.weight, rng, n_out)
        return np.maximum(0.0, w - kids.sum(axis=1))
    if k == 0:
        return np.zeros(n_out)
    edge_w = sample_weight(op.weight, rng, (n_out, k))
    return np.maximum(0.0, (edge_w - kids).max(axis=1))


def apply_operator(op: OperatorSpec, pool: EmpiricalDist, rng: np.random.Generator) -> EmpiricalDist:
    """One application of the bonus operator; the output pool has the input's size."""
    return make_pool(_apply(op, pool.samples, pool.size, rng))


def top_pool(op: OperatorSpec, size: int, rng: np.random.Generator) -> EmpiricalDist:
    """Pool from the maximal law the operator can output (start of the upper bracket)."""
    if op.objective is Objective.INDEPENDENT_SET:
        return make_pool(sample_weight(op.weight, rng, size))
    return make_pool(sample_max_weight(op.weight, op.offspring.draw(rng, size), rng))


def bracket_iterate(
    op: OperatorSpec,
    even_steps: int,
    pool_size: int,
    rng: np.random.Generator,
) -> FixedPointBracket:
    """Iterate ``T^2`` from the bottom and the top law in lockstep.

    ``gaps[s]`` is the Kolmogorov distance after ``2 (s + 1)`` applications.
    """
    if even_steps < 1:
        raise ValueError("even_steps must be at least 1")
    lower = zeros_pool(pool_size)
    upper = top_pool(op, pool_size, rng)
    gaps = []
    for _ in range(even_steps):
        for _ in range(2):
            seed = int(rng.integers(2**63))
            lower = apply_operator(op, lower, np.random.default_rng(seed))
            upper = apply_operator(op, upper, np.random.default_rng(seed))
        gaps.append(kolmogorov_distance(lower, upper))
    return FixedPointBracket(lower, upper, 2 * even_steps, gaps[-1], gaps)


#: Even steps over which a large gap must persist before declaring non-uniqueness.
STABLE_WINDOW = 5


def uniqueness_verdict(bracket: FixedPointBracket, tol: float) -> Verdict:
    """Classify a bracket.

    Unique when the final gap is below ``tol``; NonUnique when the gap has
    stayed above ``10 tol`` for the last :data:`STABLE_WINDOW` even steps and
    moved by less than ``tol`` across them; Inconclusive otherwise (typically
    slow convergence close to a threshold).
    """
    floor = max(bracket.lower.noise_floor, bracket.upper.noise_floor)
    if tol <= floor:
        raise ValueError(f"tol={tol} must exceed the pool noise floor {floor:.4g}")
    if bracket.gap < tol:
        merged = make_pool(np.concatenate((bracket.lower.samples, bracket.upper.samples)))
        return Verdict(VerdictKind.UNIQUE, bracket.gap, merged)
    window = bracket.gaps[-STABLE_WINDOW:]
    if (
        len(window) == STABLE_WINDOW
        and min(window) > 10 * tol
        and max(window) - min(window) < tol
    ):
        return Verdict(VerdictKind.NON_UNIQUE, bracket.gap)
    return Verdict(VerdictKind.INCONCLUSIVE, bracket.gap)


def limit_from_pool(
    op: OperatorSpec,
    fixed_point: EmpiricalDist,
    root_degree: Offspring,
    quantity: Quantity,
    mc_samples: int,
    rng: np.random.Generator,
) -> LimitEstimate:
    """Monte Carlo value of the per-node limit functional at a fixed point.

    Independent sets: ``E[W 1{W - sum_{i<=m} B_i > 0}]`` (or the indicator alone
    for cardinality).  Matchings: ``1/2 E[W_* 1{W_* - B_* = max_j (W_j - B_j) > 0}]``
    where ``*`` is the best neighbour; each edge is seen from both ends, hence
    the half.  Exact ties count as "not in".
    """
    pool = fixed_point.samples
    counts = root_degree.draw(rng, mc_samples)
    total = int(counts.sum())
    kids = pool[rng.integers(0, pool.size, total)]
    if op.objective is Objective.INDEPENDENT_SET:
        w = sample_weight(op.weight, rng, mc_samples)
        sums = np.bincount(_group_owner(counts), weights=kids, minlength=mc_samples)
        inside = w - sums > 0
        values = np.where(inside, w, 0.0) if quantity is Quantity.WEIGHT else inside.astype(float)
    else:
        edge_w = sample_weight(op.weight, rng, total)
        margin = edge_w - kids
        owner = _group_owner(counts)
        order = np.lexsort((margin, owner))
        last = np.cumsum(counts) - 1
        has = counts > 0
        best = np.zeros(mc_samples)
        best_w = np.zeros(mc_samples)
        best[has] = margin[order][last[has]]
        best_w[has] = edge_w[order][last[has]]
        inside = best > 0
        if quantity is Quantity.WEIGHT:
            values = 0.5 * np.where(inside, best_w, 0.0)
        else:
            values = 0.5 * inside.astype(float)
    stderr = float(values.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else 0.0
    return LimitEstimate(float(values.mean()), stderr, mc_samples, quantity)
