"""Command-line entry point: ``rdelimits <subcommand> ...``.

Exit codes: 0 success, 2 configuration error or bad usage, 3 a solver ran out
of its time budget (partial results are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from rdelimits import closedform
from rdelimits.graphs import GraphError, read_edgelist, write_edgelist
from rdelimits.harness import (
    METHODS,
    ConfigError,
    ExperimentConfig,
    pair_decorrelation,
    run_experiment,
    sample_graph,
    trial_rng,
)
from rdelimits.models import Model, parse_model
from rdelimits.rde import (
    Objective,
    OperatorSpec,
    Quantity,
    VerdictKind,
    bracket_iterate,
    limit_from_pool,
    parse_objective,
    uniqueness_verdict,
)
from rdelimits.empdist import atom_at_zero
from rdelimits.solvers import SolverDomainError, solve
from rdelimits.weights import parse_weight

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3

LIMIT_COLUMNS = ("model", "objective", "weight", "b", "unique", "weight_limit", "cardinality_limit")
LIMIT_DEGREES = range(1, 9)
LIMIT_RATES = (0.5, 1.0, 2.0, math.e, 2 * math.e, 2 * math.e + 1)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- limits --------------------------------------------------------------------


def limit_row(model: Model, objective: Objective) -> dict:
    ind = objective is Objective.INDEPENDENT_SET
    if model.kind == "poisson":
        c = model.param
        sol = closedform.solve_b_ind_poisson(c) if ind else closedform.solve_b_match_poisson(c)
        limit = closedform.limit_ind_poisson if ind else closedform.limit_match_poisson
        arg = c
    else:
        r = model.r
        sol = closedform.solve_b_ind_regular(r) if ind else closedform.solve_b_match_regular(r)
        limit = closedform.limit_ind_regular if ind else closedform.limit_match_regular
        arg = r
    row = {"model": str(model), "objective": objective.value, "weight": "exp", "b": sol.b, "unique": sol.unique}
    if sol.unique:
        lim = limit(arg)
        row.update(weight_limit=lim.weight_limit, cardinality_limit=lim.cardinality_limit)
    else:
        row.update(weight_limit=None, cardinality_limit=None)
    return row


def limit_grid() -> list[Model]:
    models = [Model("regular", r) for r in LIMIT_DEGREES]
    models += [Model("poisson", c) for c in LIMIT_RATES]
    models.append(Model("cycle", 2))
    return models


def cmd_limits(args) -> int:
    models = limit_grid() if args.all or not args.model else [parse_model(args.model)]
    objectives = [parse_objective(args.objective)] if args.objective else list(Objective)
    rows = [limit_row(m, o) for m in models for o in objectives]
    if args.format == "json":
        text = "".join(json.dumps(r) + "\n" for r in rows)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LIMIT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in LIMIT_COLUMNS])
        text = buf.getvalue()
    _emit(text, args.out)
    for r in rows:
        if r["model"] == "regular:4" and r["objective"] == "ind":
            print(
                f"note: regular:4 ind weight_limit {r['weight_limit']:.4f} disagrees with the "
                f"reported value {closedform.REPORTED_IND_REGULAR_4} (discrepancy flag)",
                file=sys.stderr,
            )
    return EXIT_OK


# -- rde -----------------------------------------------------------------------


def cmd_rde(args) -> int:
    model = parse_model(args.model)
    op = OperatorSpec(parse_objective(args.objective), model.offspring, parse_weight(args.weight))
    rng = np.random.default_rng(args.seed)
    bracket = bracket_iterate(op, args.steps, args.pool, rng)
    verdict = uniqueness_verdict(bracket, args.tol)
    rec = {"verdict": verdict.kind.value, "gap": bracket.gap}
    if verdict.kind is VerdictKind.UNIQUE:
        fp = verdict.fixed_point
        w = limit_from_pool(op, fp, model.root_degree, Quantity.WEIGHT, args.mc_samples, rng)
        c = limit_from_pool(op, fp, model.root_degree, Quantity.CARDINALITY, args.mc_samples, rng)
        rec.update(
            atom_at_zero=atom_at_zero(fp),
            limit_weight=w.value,
            limit_cardinality=c.value,
            stderr=w.stderr,
            stderr_cardinality=c.stderr,
        )
    else:
        rec.update(atom_at_zero=None, limit_weight=None, limit_cardinality=None, stderr=None, stderr_cardinality=None)
    _emit(json.dumps(rec) + "\n", args.out)
    return EXIT_OK


# -- gen / solve ---------------------------------------------------------------


def _config(args, **overrides) -> ExperimentConfig:
    fields = dict(
        model=parse_model(args.model),
        objective=parse_objective(args.objective),
        weight=parse_weight(args.weight),
        n=args.n,
        trials=getattr(args, "trials", 1),
        method=getattr(args, "method", "auto"),
        seed=args.seed,
        out=args.out,
        time_budget=getattr(args, "budget", 10.0),
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


def cmd_gen(args) -> int:
    cfg = _config(args, trials=1)
    cfg.validate()
    g = sample_graph(cfg, trial_rng(cfg.seed, 0))
    write_edgelist(g, args.out or sys.stdout, args.node_weights)
    return EXIT_OK


def cmd_solve(args) -> int:
    g = read_edgelist(args.input, args.node_weights)
    objective = parse_objective(args.objective)
    t0 = time.perf_counter()
    res = solve(g, objective, args.method, args.budget)
    rec = {
        "value": res.value,
        "cardinality": res.cardinality,
        "exact": res.exact,
        "seconds": time.perf_counter() - t0,
    }
    _emit(json.dumps(rec) + "\n", args.out)
    return EXIT_OK if res.exact else EXIT_BUDGET


# -- simulate / ks / pairs -------------------------------------------------------


def cmd_simulate(args) -> int:
    row = run_experiment(_config(args), jobs=args.jobs)
    text = row.to_csv(timing=args.timing)
    if args.raw:
        text += "".join(t.to_json(args.timing) + "\n" for t in row.trials)
    _emit(text, args.out)
    return EXIT_OK if row.exact else EXIT_BUDGET


def cmd_ks(args) -> int:
    ks = closedform.karp_sipser_constants(args.c)
    rec = {
        "c": args.c,
        "gamma_star": ks.gamma_star,
        "gamma_star_star": ks.gamma_star_star,
        "matching_limit": ks.matching_limit,
        "indset_limit": ks.indset_limit,
        "indset_limit_printed_form": ks.indset_limit_without_c,
    }
    code = EXIT_OK
    if args.n:
        if args.seed is None:
            raise ConfigError("--seed is required when simulating (--n given)")
        cfg = ExperimentConfig(
            Model("poisson", args.c), Objective.MATCHING, parse_weight("one"),
            args.n, args.trials, "ks", args.seed, args.out, args.budget,
        )
        row = run_experiment(cfg, jobs=args.jobs)
        rec.update(mean_matching=row.mean_value, stderr=row.stderr_value, z=row.z_value, exact=row.exact)
        code = EXIT_OK if row.exact else EXIT_BUDGET
    _emit(json.dumps(rec) + "\n", args.out)
    return code


def cmd_pairs(args) -> int:
    cfg = _config(args, trials=args.graphs)
    res = pair_decorrelation(cfg, args.pairs)
    _emit(json.dumps(res.to_dict()) + "\n", args.out)
    return EXIT_OK if res.exact else EXIT_BUDGET


# -- parser --------------------------------------------------------------------

STOCHASTIC = {"rde", "gen", "simulate", "pairs"}


def _graph_args(p, objective=True):
    p.add_argument("--model", default=None, help="regular:R, poisson:C or cycle")
    p.add_argument("--n", type=int, default=None, help="number of nodes")
    p.add_argument("--weight", default="exp", help="exp, bernoulli:z, one or point:v, optionally *scale")
    if objective:
        p.add_argument("--objective", default="ind", help="ind or match")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdelimits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value file; command-line flags override it")
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    p = add("limits", "closed-form limits table")
    p.add_argument("--all", action="store_true", help="full grid: r = 1..8, c in {0.5, 1, 2, e, 2e, 2e+1}, cycle")
    p.add_argument("--model")
    p.add_argument("--objective")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_limits)

    p = add("rde", "population dynamics on the fixed-point equation")
    p.add_argument("--objective", default="ind")
    p.add_argument("--model", default=None)
    p.add_argument("--weight", default="exp")
    p.add_argument("--pool", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=30, help="number of T^2 applications")
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--mc-samples", type=int, default=200_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_rde)

    p = add("gen", "sample a weighted graph as an edge list")
    _graph_args(p)
    p.add_argument("--node-weights", help="file for the node-weight column")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    p = add("solve", "solve an edge-list instance exactly")
    p.add_argument("--input", required=True)
    p.add_argument("--node-weights")
    p.add_argument("--objective", default="ind")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--budget", type=float, default=10.0, help="seconds for branch and bound")
    p.set_defaults(func=cmd_solve)

    p = add("simulate", "Monte Carlo over sampled graphs, compared with theory")
    _graph_args(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--raw", action="store_true", help="append per-trial JSON lines")
    p.add_argument("--timing", action="store_true", help="include wall-clock fields (not reproducible)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = add("ks", "Karp-Sipser constants, optionally with a simulation")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n", type=int, default=0, help="simulate on G(n, c/n) when positive")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_ks)

    p = add("pairs", "pairwise decorrelation of optimum membership")
    _graph_args(p)
    p.add_argument("--graphs", type=int, default=500)
    p.add_argument("--pairs", type=int, default=0, help="sampled pairs per graph; 0 uses all pairs")
    p.add_argument("--method", choices=METHODS, default="bnb")
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_pairs)
    return parser


def read_config(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(parser, sub_parser, argv, args):
    """Re-parse with config-file values as defaults so explicit flags win."""
    raw = read_config(args.config)
    known = {a.dest: a for a in sub_parser._actions}
    defaults = {}
    for key, value in raw.items():
        if key not in known or key in ("config", "func", "help"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(value) if action.type else value
        action.required = False
    sub_parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def cli_main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            sub_parser = parser._subparsers._group_actions[0].choices[args.command]
            args = _apply_config(parser, sub_parser, argv, args)
        if args.command in STOCHASTIC and args.seed is None:
            raise ConfigError(f"--seed is required for {args.command}")
        if args.command in ("rde", "gen", "simulate", "pairs") and args.model is None:
            raise ConfigError("--model is required")
        if args.command in ("gen", "simulate", "pairs") and args.n is None:
            raise ConfigError("--n is required")
        return args.func(args)
    except (ConfigError, GraphError, SolverDomainError, ValueError, OSError) as exc:
        print(f"rdelimits {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
