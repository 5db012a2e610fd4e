from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from rdelimits.graphs import Target, WeightedGraph, assign_weights, gen_cycle, gen_gnp, gen_regular
from rdelimits.rde import Objective
from rdelimits.solvers import (
    BoundaryCondition,
    InfeasibleBoundary,
    LeafStatus,
    RootStatus,
    SolverDomainError,
    constrained_bruteforce_bonus,
    is_independent,
    is_matching,
    karp_sipser,
    karp_sipser_matching,
    line_graph,
    mwis_bnb,
    mwis_bruteforce,
    mwis_forest_unicyclic,
    mwm_bruteforce,
    mwm_forest_unicyclic,
    regular_tree_root_bonus,
    solve,
    tree_bonus,
)
from rdelimits.weights import WeightSpec

IND = Objective.INDEPENDENT_SET
MATCH = Objective.MATCHING
EXP = WeightSpec.exponential()
IN, OUT = LeafStatus.FORCED_IN, LeafStatus.FORCED_OUT


def graph(n, edges, nw=None, ew=None):
    return WeightedGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), nw, ew)


def random_graph(n, p, seed, target=Target.NODES):
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    g = graph(n, pairs)
    return assign_weights(g, EXP, target, rng)


def random_tree(n, rng):
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    return graph(n, [(p, i) for i, p in enumerate(parents, start=1)])


def milp_mwis(g):
    w = g.node_weights
    if not g.m:
        return float(w.sum())
    a = np.zeros((g.m, g.n))
    a[np.arange(g.m), g.edges[:, 0]] = 1
    a[np.arange(g.m), g.edges[:, 1]] = 1
    res = milp(-w, integrality=np.ones(g.n), bounds=Bounds(0, 1), constraints=LinearConstraint(a, -np.inf, 1))
    return -res.fun


def assert_valid(g, res, objective):
    if objective is IND:
        assert is_independent(g, res.chosen)
        w = g.node_weights if g.node_weights is not None else np.ones(g.n)
    else:
        assert is_matching(g, res.chosen)
        w = g.edge_weights if g.edge_weights is not None else np.ones(g.m)
    assert res.value == pytest.approx(float(w[res.chosen].sum()), abs=1e-9)


# -- brute force -------------------------------------------------------------


def test_bruteforce_ind_examples():
    res = mwis_bruteforce(graph(3, [], nw=[1, 2, 3]))
    assert res.value == 6 and res.chosen.tolist() == [0, 1, 2]
    assert mwis_bruteforce(graph(3, [(0, 1), (1, 2), (0, 2)], nw=[1, 2, 3])).value == 3
    res = mwis_bruteforce(graph(3, [(0, 1), (1, 2)], nw=[1, 3, 1]))
    assert res.value == 3 and res.chosen.tolist() == [1]


def test_bruteforce_match_examples():
    assert mwm_bruteforce(graph(2, [(0, 1)], ew=[5])).value == 5
    assert mwm_bruteforce(graph(3, [(0, 1), (1, 2), (0, 2)], ew=[1, 2, 3])).value == 3
    res = mwm_bruteforce(graph(4, [(0, 1), (1, 2), (2, 3)], ew=[2, 3, 2]))
    assert res.value == 4 and res.chosen.tolist() == [0, 2]


def test_bruteforce_limits():
    with pytest.raises(SolverDomainError):
        mwis_bruteforce(graph(25, []))
    with pytest.raises(SolverDomainError):
        mwm_bruteforce(gen_cycle(25))


def test_unweighted_defaults_to_cardinality():
    g = gen_cycle(7)
    assert mwis_bruteforce(g).value == 3
    assert mwm_bruteforce(g).value == 3


@given(st.integers(1, 16), st.floats(0.05, 0.6), st.integers(0, 2**32 - 1))
def test_bruteforce_matches_milp(n, p, seed):
    g = random_graph(n, p, seed)
    res = mwis_bruteforce(g)
    assert_valid(g, res, IND)
    assert res.value == pytest.approx(milp_mwis(g), abs=1e-7)


# -- branch and bound --------------------------------------------------------


@given(st.integers(1, 16), st.floats(0.05, 0.5), st.integers(0, 2**32 - 1))
def test_bnb_equals_bruteforce(n, p, seed):
    g = random_graph(n, p, seed)
    if g.degrees().max(initial=0) > 8:
        return
    res = mwis_bnb(g)
    assert res.exact
    assert_valid(g, res, IND)
    assert res.value == pytest.approx(mwis_bruteforce(g).value, abs=1e-9)


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_bnb_unit_weights_equals_bruteforce(n, seed):
    g = random_graph(n, 0.25, seed).with_weights(node_weights=np.ones(n))
    if g.degrees().max(initial=0) > 8:
        return
    assert mwis_bnb(g).value == mwis_bruteforce(g).value


@pytest.mark.parametrize("seed", range(5))
def test_bnb_matches_milp_on_regular(seed):
    rng = np.random.default_rng(seed)
    g = assign_weights(gen_regular(120, 4, rng), EXP, Target.NODES, rng)
    res = mwis_bnb(g)
    assert res.exact
    assert_valid(g, res, IND)
    assert res.value == pytest.approx(milp_mwis(g), abs=1e-7)


def test_bnb_cycle_equals_dp(rng):
    g = assign_weights(gen_cycle(100), EXP, Target.NODES, rng)
    assert mwis_bnb(g).value == pytest.approx(mwis_forest_unicyclic(g).value, abs=1e-9)


def test_bnb_regular3_finite_size():
    vals = []
    for s in range(200):
        rng = np.random.default_rng([3, s])
        g = assign_weights(gen_regular(80, 3, rng), EXP, Target.NODES, rng)
        vals.append(mwis_bnb(g).value / g.n)
    assert abs(np.mean(vals) - 0.6077) < 0.02


def test_bnb_domain():
    with pytest.raises(SolverDomainError):
        mwis_bnb(graph(201, []))
    star = graph(10, [(0, i) for i in range(1, 10)])
    with pytest.raises(SolverDomainError):
        mwis_bnb(star)


def test_bnb_timeout_returns_feasible_inexact():
    rng = np.random.default_rng(0)
    g = gen_regular(200, 6, rng).with_weights(node_weights=np.ones(200))
    res = mwis_bnb(g, time_budget=0.0)
    assert not res.exact
    assert_valid(g, res, IND)
    assert res.value > 0


def test_bnb_on_line_graph_is_matching(rng):
    g = assign_weights(gen_regular(30, 3, rng), EXP, Target.EDGES, rng)
    res = solve(g, MATCH, "bnb")
    assert_valid(g, res, MATCH)
    lg = line_graph(g)
    assert lg.n == g.m and np.all(lg.degrees() == 4)


# -- forest / unicyclic and conditioned DP -------------------------------------


@given(st.integers(1, 14), st.integers(0, 2**32 - 1))
def test_dp_equals_bruteforce_on_trees(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(n, rng)
    t = assign_weights(assign_weights(t, EXP, Target.NODES, rng), EXP, Target.EDGES, rng)
    a, b = mwis_forest_unicyclic(t), mwm_forest_unicyclic(t)
    assert_valid(t, a, IND)
    assert_valid(t, b, MATCH)
    assert a.value == pytest.approx(mwis_bruteforce(t).value, abs=1e-9)
    assert b.value == pytest.approx(mwm_bruteforce(t).value, abs=1e-9)


@given(st.integers(3, 14), st.integers(0, 2**32 - 1))
def test_dp_equals_bruteforce_on_unicyclic(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(n, rng)
    missing = [(u, v) for u, v in combinations(range(n), 2) if (u, v) not in set(map(tuple, t.edges.tolist()))]
    u, v = missing[int(rng.integers(len(missing)))]
    g = graph(n, t.edges.tolist() + [(u, v)])
    g = assign_weights(assign_weights(g, EXP, Target.NODES, rng), EXP, Target.EDGES, rng)
    a, b = mwis_forest_unicyclic(g), mwm_forest_unicyclic(g)
    assert_valid(g, a, IND)
    assert_valid(g, b, MATCH)
    assert a.value == pytest.approx(mwis_bruteforce(g).value, abs=1e-9)
    if g.m <= 24:
        assert b.value == pytest.approx(mwm_bruteforce(g).value, abs=1e-9)


def test_dp_rejects_excess_two():
    g = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    with pytest.raises(SolverDomainError):
        mwis_forest_unicyclic(g)
    with pytest.raises(SolverDomainError):
        mwm_forest_unicyclic(g)


@given(st.integers(4, 16), st.floats(0.15, 0.45), st.integers(0, 2**32 - 1))
def test_auto_equals_bruteforce(n, p, seed):
    g = random_graph(n, p, seed)
    g = assign_weights(g, EXP, Target.EDGES, np.random.default_rng(seed + 1))
    a = solve(g, IND, "auto")
    assert_valid(g, a, IND)
    assert a.value == pytest.approx(mwis_bruteforce(g).value, abs=1e-9)
    if g.m <= 24:
        b = solve(g, MATCH, "auto")
        assert_valid(g, b, MATCH)
        assert b.value == pytest.approx(mwm_bruteforce(g).value, abs=1e-9)


@pytest.mark.parametrize("objective, target", [(IND, Target.NODES), (MATCH, Target.EDGES)])
def test_dp_cycle_million(objective, target):
    rng = np.random.default_rng(1)
    g = assign_weights(gen_cycle(10**6), EXP, target, rng)
    res = solve(g, objective, "dp")
    assert res.value / g.n == pytest.approx(2 / 3, abs=0.002)


def test_auto_on_critical_gnp_is_feasible(rng):
    g = assign_weights(gen_gnp(5000, 1.0, rng), EXP, Target.NODES, rng)
    res = solve(g, IND, "auto")
    assert res.exact
    assert_valid(g, res, IND)


def test_solve_unknown_method():
    with pytest.raises(SolverDomainError):
        solve(gen_cycle(4), IND, "magic")
    with pytest.raises(SolverDomainError):
        solve(gen_cycle(4), IND, "ks")


# -- tree bonus ------------------------------------------------------------------


def test_tree_bonus_single_node():
    res = tree_bonus(graph(1, [], nw=[2.5]), IND)
    assert res.bonus == 2.5 and res.root_in_optimum is RootStatus.IN


def test_tree_bonus_star():
    t = graph(3, [(0, 1), (0, 2)], nw=[1.0, 0.3, 0.4])
    res = tree_bonus(t, IND)
    assert res.bonus == pytest.approx(0.3)
    assert res.root_in_optimum is RootStatus.IN


def test_tree_bonus_tie_and_out():
    assert tree_bonus(graph(2, [(0, 1)], nw=[1.0, 1.0]), IND).root_in_optimum is RootStatus.TIE
    assert tree_bonus(graph(2, [(0, 1)], nw=[1.0, 2.0]), IND).root_in_optimum is RootStatus.OUT
    m = tree_bonus(graph(3, [(0, 1), (1, 2)], ew=[1.0, 3.0]), MATCH)
    assert m.bonus == 0.0 and m.root_in_optimum is RootStatus.OUT


def test_tree_bonus_boundary_examples():
    t = graph(3, [(0, 1), (0, 2)], nw=[1.0, 0.3, 0.4])
    forced = BoundaryCondition({1: (IN, 0.9), 2: (OUT, 0.4)})
    assert tree_bonus(t, IND, forced).bonus == pytest.approx(0.1)
    all_out = BoundaryCondition.uniform([1, 2], OUT, [0.3, 0.4])
    assert tree_bonus(t, IND, all_out).bonus == 1.0
    path = graph(3, [(0, 1), (1, 2)], ew=[2.0, 1.5])
    assert tree_bonus(path, MATCH, BoundaryCondition({2: (IN, 1.5)})).bonus == pytest.approx(0.5)
    assert tree_bonus(path, MATCH, BoundaryCondition({2: (OUT, 1.5)})).bonus == pytest.approx(2.0)


def test_tree_bonus_infeasible_boundary():
    t = graph(3, [(0, 1), (0, 2)], nw=[1.0, 0.3, 0.4], ew=[1.0, 1.0])
    both = BoundaryCondition({1: (IN, 1.0), 2: (IN, 1.0)})
    with pytest.raises(InfeasibleBoundary):
        tree_bonus(t, MATCH, both)
    pair = graph(2, [(0, 1)], nw=[1.0, 1.0])
    with pytest.raises(SolverDomainError):
        tree_bonus(pair, IND, BoundaryCondition({0: (IN, 1.0)}))
    with pytest.raises(SolverDomainError):
        tree_bonus(gen_cycle(4), IND)


def random_boundary(t, objective, rng):
    deg = t.degrees()
    leaves = [v for v in range(1, t.n) if deg[v] == 1]
    chosen = [v for v in leaves if rng.random() < 0.7]
    leaves_map, used = {}, set()
    for v in chosen:
        status = IN if rng.random() < 0.5 else OUT
        p = int(t.neighbors(v)[0])
        if objective is MATCH and status is IN:
            if p in used:
                status = OUT
            used.add(p)
        leaves_map[v] = (status, float(rng.exponential()))
    return BoundaryCondition(leaves_map)


@settings(max_examples=200)
@given(st.integers(1, 14), st.sampled_from([IND, MATCH]), st.integers(0, 2**32 - 1))
def test_tree_bonus_equals_constrained_bruteforce(n, objective, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(n, rng)
    t = assign_weights(assign_weights(t, EXP, Target.NODES, rng), EXP, Target.EDGES, rng)
    bc = random_boundary(t, objective, rng)
    res = tree_bonus(t, objective, bc)
    assert res.bonus == pytest.approx(constrained_bruteforce_bonus(t, objective, bc), abs=1e-9)
    if objective is IND:
        assert 0.0 <= res.bonus <= t.node_weights[0] + 1e-12


def _explicit_regular_tree(r, d, weights, objective):
    """Build H_r(d) level by level from the batched weight layout."""
    edges, level_nodes, nxt = [], [[0]], 1
    fan = [r] + [r - 1] * (d - 1)
    for i in range(d):
        cur = []
        for p in level_nodes[-1]:
            for _ in range(fan[i]):
                edges.append((p, nxt))
                cur.append(nxt)
                nxt += 1
        level_nodes.append(cur)
    nw = np.concatenate(weights)
    ew_by_child = {v: nw[v] for v in range(1, nxt)}
    g = graph(nxt, edges, nw=nw)
    ew = np.array([ew_by_child[max(u, v)] for u, v in g.edges.tolist()])
    return g.with_weights(edge_weights=ew), level_nodes[-1]


@pytest.mark.parametrize("objective, status, r", [(IND, IN, 3), (IND, OUT, 3), (MATCH, OUT, 3), (MATCH, IN, 2)])
def test_regular_tree_root_bonus_matches_tree_bonus(objective, status, r):
    d = 3
    rng = np.random.default_rng(8)
    batch = regular_tree_root_bonus(objective, r, d, EXP, (status,), 3, rng)[status]
    rng = np.random.default_rng(8)
    sizes = [1] + [r * (r - 1) ** (i - 1) for i in range(1, d + 1)]
    weights = [rng.exponential(size=(3, s)) for s in sizes]
    for k in range(3):
        t, leaves = _explicit_regular_tree(r, d, [w[k] for w in weights], objective)
        pinned = t.node_weights[leaves]
        bc = BoundaryCondition.uniform(leaves, status, pinned)
        assert batch[k] == pytest.approx(tree_bonus(t, objective, bc).bonus, abs=1e-12)


def test_regular_tree_matching_forced_in_infeasible(rng):
    with pytest.raises(InfeasibleBoundary):
        regular_tree_root_bonus(MATCH, 3, 3, EXP, (IN, OUT), 10, rng)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_regular_tree_sandwich_ordering(d):
    out = regular_tree_root_bonus(IND, 3, d, EXP, (IN, OUT), 2000, np.random.default_rng(2))
    # leaves start at W (ForcedIn) or 0 (ForcedOut); d anti-monotone levels follow
    hi, lo = (IN, OUT) if d % 2 == 0 else (OUT, IN)
    assert np.all(out[hi] >= out[lo] - 1e-12)


# -- Karp-Sipser -----------------------------------------------------------------


def test_karp_sipser_path():
    ks = karp_sipser(graph(4, [(0, 1), (1, 2), (2, 3)]))
    assert ks.matching.size == 2 and ks.remainder.n == 0
    assert ks.stage1_cover.size == 2


def test_karp_sipser_cycle():
    ks = karp_sipser(gen_cycle(9))
    assert ks.matching.size == 0 and ks.remainder.n == 9 and ks.remainder.m == 9


def test_karp_sipser_remainder_min_degree(rng):
    g = gen_gnp(3000, 3.0, rng)
    ks = karp_sipser(g)
    assert is_matching(g, ks.matching)
    assert ks.remainder.degrees().min(initial=2) >= 2


@settings(max_examples=150)
@given(st.integers(1, 16), st.floats(0.05, 0.4), st.integers(0, 2**32 - 1))
def test_karp_sipser_stage1_optimal(n, p, seed):
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    g = graph(n, pairs)
    if g.m > 24 or ks_remainder_too_big(g):
        return
    ks = karp_sipser(g)
    rest = mwm_bruteforce(ks.remainder).value if ks.remainder.m else 0
    assert ks.matching.size + rest == mwm_bruteforce(g).value


def ks_remainder_too_big(g):
    return karp_sipser(g).remainder.m > 24


def test_karp_sipser_matching_critical():
    vals, rem = [], []
    for s in range(3):
        g = gen_gnp(10**5, 1.0, np.random.default_rng(s))
        res = karp_sipser_matching(g)
        assert res.exact
        vals.append(res.cardinality / g.n)
        rem.append(karp_sipser(g).remainder.n / g.n)
    assert np.mean(vals) == pytest.approx(0.2721, abs=0.005)
    assert max(rem) < 0.01


def test_karp_sipser_matching_is_maximum_small(rng):
    for _ in range(30):
        g = gen_gnp(18, 2.5, rng)
        if g.m > 24:
            continue
        res = karp_sipser_matching(g)
        assert is_matching(g, res.chosen)
        assert res.value == mwm_bruteforce(g).value
