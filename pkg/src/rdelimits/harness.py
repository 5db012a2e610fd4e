"""Monte Carlo experiments on sampled graphs and comparison with the closed forms."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from rdelimits import closedform
from rdelimits.graphs import GraphError, Target, assign_weights, gen_cycle, gen_gnp, gen_regular
from rdelimits.models import Model
from rdelimits.rde import Objective
from rdelimits.solvers import BNB_NODE_LIMIT, BRUTE_NODE_LIMIT, SolverDomainError, solve
from rdelimits.weights import WeightKind, WeightSpec

METHODS = ("auto", "brute", "bnb", "dp", "ks")
Z_THRESHOLD = 3.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    objective: Objective
    weight: WeightSpec
    n: int
    trials: int
    method: str = "auto"
    seed: int = 0
    out: str | None = None
    time_budget: float = 10.0

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.method not in METHODS:
            raise ConfigError(f"unknown solver method {self.method!r}; pick one of {', '.join(METHODS)}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        kind, n = self.model.kind, self.n
        if kind == "cycle" and n < 3:
            raise ConfigError("a cycle needs n >= 3")
        if kind == "regular":
            r = self.model.r
            if (n * r) % 2 or r >= n:
                raise ConfigError(f"no simple {r}-regular graph on {n} nodes")
        if kind == "poisson" and self.model.param > n:
            raise ConfigError("need c <= n")
        ind = self.objective is Objective.INDEPENDENT_SET
        if self.method == "brute":
            size = n if ind else self._max_edges()
            if size is None or size > BRUTE_NODE_LIMIT:
                raise ConfigError(f"brute force needs at most {BRUTE_NODE_LIMIT} {'nodes' if ind else 'edges'}")
        if self.method == "bnb":
            if kind == "poisson":
                raise ConfigError("bnb needs bounded degree; use auto on G(n, c/n)")
            size = n if ind else self._max_edges()
            if size > BNB_NODE_LIMIT or self.model.r > 8:
                raise ConfigError(f"bnb needs at most {BNB_NODE_LIMIT} {'nodes' if ind else 'edges'} and degree <= 8")
        if self.method == "dp":
            if kind == "regular" and self.model.r > 2:
                raise ConfigError("dp needs components with at most one cycle; regular graphs with r > 2 have many")
            if kind == "poisson" and self.model.param >= 1:
                raise ConfigError("dp needs subcritical G(n, c/n), c < 1")
        if self.method == "ks":
            if ind or self.weight.kind is not WeightKind.ONE:
                raise ConfigError("ks computes unweighted matchings: use --objective match --weight one")

    def _max_edges(self):
        if self.model.kind == "poisson":
            return None
        return self.n * self.model.r // 2

    def echo(self) -> dict:
        return {
            "model": str(self.model),
            "objective": self.objective.value,
            "weight": str(self.weight),
            "n": self.n,
            "trials": self.trials,
            "method": self.method,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TrialResult:
    trial: int
    value: float
    cardinality: float
    exact: bool
    seconds: float

    def to_json(self, timing: bool = False) -> str:
        d = asdict(self)
        if not timing:
            d.pop("seconds")
        return json.dumps(d)


@dataclass(frozen=True)
class ReportRow:
    config: dict
    mean_value: float
    stderr_value: float
    mean_cardinality: float
    stderr_cardinality: float
    theory_value: float | None
    theory_cardinality: float | None
    z_value: float | None
    z_cardinality: float | None
    exact: bool
    runtime: float
    trials: list = field(default_factory=list, repr=False)

    COLUMNS = (
        "model", "objective", "weight", "n", "trials", "method", "seed",
        "mean_value", "stderr_value", "mean_cardinality", "stderr_cardinality",
        "theory_value", "theory_cardinality", "z_value", "z_cardinality", "exact",
    )

    def record(self, timing: bool = False) -> dict:
        d = dict(self.config)
        for key in self.COLUMNS[7:]:
            d[key] = getattr(self, key)
        if timing:
            d["runtime"] = self.runtime
        return d

    def to_csv(self, timing: bool = False) -> str:
        rec = self.record(timing)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rec))
        writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in rec.values()])
        return buf.getvalue()


# -- theory --------------------------------------------------------------------


@dataclass(frozen=True)
class Theory:
    value: float | None
    cardinality: float | None


def regime_is_unique(model: Model, objective: Objective, weight: WeightSpec) -> bool | None:
    """Whether the fixed point of T^2 is known to be unique; ``None`` when no closed form decides it."""
    kind = weight.kind
    if kind is WeightKind.EXPONENTIAL and weight.scale == 1.0:
        if objective is Objective.MATCHING:
            return True
        if model.kind == "poisson":
            return closedform.solve_b_ind_poisson(model.param).unique
        return closedform.solve_b_ind_regular(model.r).unique
    if kind in (WeightKind.ONE, WeightKind.POINT_MASS):
        if model.kind == "poisson" and objective is Objective.INDEPENDENT_SET:
            return closedform.deterministic_poisson_fixed_point(model.param).unique
        if model.kind != "poisson" and model.r >= 2:
            return False
        return None
    if kind is WeightKind.BERNOULLI and model.kind == "regular" and model.r == 3 and objective is Objective.INDEPENDENT_SET:
        return closedform.bernoulli_fixed_points_r3(weight.param).unique
    return None


def theory_for(model: Model, objective: Objective, weight: WeightSpec) -> Theory | None:
    """Closed-form per-node limits of value and cardinality, when known."""
    kind = weight.kind
    ind = objective is Objective.INDEPENDENT_SET
    if kind is WeightKind.EXPONENTIAL and weight.scale == 1.0:
        try:
            if model.kind == "poisson":
                lim = closedform.limit_ind_poisson(model.param) if ind else closedform.limit_match_poisson(model.param)
            else:
                lim = closedform.limit_ind_regular(model.r) if ind else closedform.limit_match_regular(model.r)
        except closedform.NonUniqueRegime:
            return None
        return Theory(lim.weight_limit, lim.cardinality_limit)
    if kind is WeightKind.ONE and model.kind == "poisson":
        ks = closedform.karp_sipser_constants(model.param)
        value = ks.indset_limit if ind else ks.matching_limit
        return None if value is None else Theory(value, value)
    if kind is WeightKind.ONE and model.kind == "cycle":
        return Theory(0.5, 0.5)
    return None


# -- running -------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def sample_graph(cfg: ExperimentConfig, rng: np.random.Generator):
    kind = cfg.model.kind
    if kind == "cycle":
        g = gen_cycle(cfg.n)
    elif kind == "regular":
        g = gen_regular(cfg.n, cfg.model.r, rng)
    else:
        g = gen_gnp(cfg.n, cfg.model.param, rng)
    target = Target.NODES if cfg.objective is Objective.INDEPENDENT_SET else Target.EDGES
    return assign_weights(g, cfg.weight, target, rng)


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    t0 = time.perf_counter()
    g = sample_graph(cfg, trial_rng(cfg.seed, trial))
    res = solve(g, cfg.objective, cfg.method, cfg.time_budget)
    return TrialResult(trial, res.value / cfg.n, res.cardinality / cfg.n, res.exact, time.perf_counter() - t0)


def _run_trial_args(args):
    return run_trial(*args)


def run_trials(cfg: ExperimentConfig, jobs: int = 1) -> list[TrialResult]:
    args = [(cfg, t) for t in range(cfg.trials)]
    if jobs <= 1:
        return [run_trial(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves trial order, so aggregation does not depend on scheduling
        return list(pool.map(_run_trial_args, args))


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _z(mean: float, stderr: float, theory: float | None) -> float | None:
    if theory is None or stderr == 0.0:
        return None
    return (mean - theory) / stderr


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ReportRow:
    cfg.validate()
    t0 = time.perf_counter()
    try:
        trials = run_trials(cfg, jobs)
    except (GraphError, SolverDomainError) as exc:
        raise ConfigError(str(exc)) from exc
    values = np.array([t.value for t in trials])
    cards = np.array([t.cardinality for t in trials])
    mv, sv = _mean_stderr(values)
    mc, sc = _mean_stderr(cards)
    theory = theory_for(cfg.model, cfg.objective, cfg.weight)
    tv = theory.value if theory else None
    tc = theory.cardinality if theory else None
    return ReportRow(
        config=cfg.echo(),
        mean_value=mv,
        stderr_value=sv,
        mean_cardinality=mc,
        stderr_cardinality=sc,
        theory_value=tv,
        theory_cardinality=tc,
        z_value=_z(mv, sv, tv),
        z_cardinality=_z(mc, sc, tc),
        exact=all(t.exact for t in trials),
        runtime=time.perf_counter() - t0,
        trials=trials,
    )


# -- long-range independence ---------------------------------------------------------


@dataclass(frozen=True)
class PairDecorrelation:
    gap: float
    stderr: float
    joint: float
    marginal: float
    graphs: int
    exact: bool

    def to_dict(self) -> dict:
        return asdict(self)


def pair_decorrelation(cfg: ExperimentConfig, pairs: int = 0) -> PairDecorrelation:
    """Estimate ``|P(i, j in O) - P(i in O) P(j in O)|`` for a uniform random pair.

    ``O`` is the optimum on each of ``cfg.trials`` sampled graphs, ``i, j``
    range over nodes (independent sets) or edges (matchings).  With
    ``pairs = 0`` every pair of every graph is used: the labels of the random
    graph are exchangeable, so the joint frequency is ``K (K-1) / (N (N-1))``
    for an optimum of size ``K`` among ``N`` elements.  Otherwise ``pairs``
    distinct pairs are drawn per graph.  The standard error is the delta
    method over graphs.
    """
    cfg.validate()
    unique = regime_is_unique(cfg.model, cfg.objective, cfg.weight)
    if not unique:
        why = "has several fixed points" if unique is False else "has no uniqueness verdict"
        raise ConfigError(f"refusing pair decorrelation: {cfg.model}/{cfg.objective.value}/{cfg.weight} {why}")
    joint = np.empty(cfg.trials)
    marg = np.empty(cfg.trials)
    exact = True
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        g = sample_graph(cfg, rng)
        res = solve(g, cfg.objective, cfg.method, cfg.time_budget)
        exact &= res.exact
        size = g.n if cfg.objective is Objective.INDEPENDENT_SET else g.m
        k = res.cardinality
        if pairs <= 0:
            joint[t] = k * (k - 1) / (size * (size - 1))
            marg[t] = k / size
        else:
            member = np.zeros(size, dtype=bool)
            member[res.chosen] = True
            i = rng.integers(0, size, pairs)
            j = (i + rng.integers(1, size, pairs)) % size
            joint[t] = np.mean(member[i] & member[j])
            marg[t] = (np.mean(member[i]) + np.mean(member[j])) / 2
    mj, mm = float(joint.mean()), float(marg.mean())
    diff = mj - mm * mm
    grad = np.array([1.0, -2.0 * mm])
    if cfg.trials > 1:
        cov = np.cov(np.vstack((joint, marg)), ddof=1)
        stderr = float(math.sqrt(max(grad @ cov @ grad, 0.0) / cfg.trials))
    else:
        stderr = 0.0
    return PairDecorrelation(abs(diff), stderr, mj, mm, cfg.trials, exact)
