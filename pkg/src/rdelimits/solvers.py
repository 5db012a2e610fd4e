"""Exact and heuristic solvers for max-weight independent sets and matchings.

Missing node (edge) weights are read as all ones, so every solver doubles as
a maximum-cardinality solver. Matchings are reported as indices into
``g.edges``.
"""

from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from rdelimits.graphs import WeightedGraph, component_labels
from rdelimits.rde import Objective
from rdelimits.weights import WeightSpec, sample_weight

BRUTE_NODE_LIMIT = 24
BNB_NODE_LIMIT = 200
BNB_DEGREE_LIMIT = 8
BNB_TIME_BUDGET = 10.0
TIE_TOL = 1e-12


class SolverDomainError(ValueError):
    """The instance is outside the solver's supported domain."""


class InfeasibleBoundary(ValueError):
    pass


@dataclass(frozen=True)
class SolveResult:
    value: float
    chosen: np.ndarray
    exact: bool = True

    @property
    def cardinality(self) -> int:
        return int(self.chosen.size)


def node_weights_of(g: WeightedGraph) -> np.ndarray:
    return np.ones(g.n) if g.node_weights is None else np.asarray(g.node_weights, dtype=float)


def edge_weights_of(g: WeightedGraph) -> np.ndarray:
    return np.ones(g.m) if g.edge_weights is None else np.asarray(g.edge_weights, dtype=float)


def is_independent(g: WeightedGraph, nodes) -> bool:
    mask = np.zeros(g.n, dtype=bool)
    mask[np.asarray(nodes, dtype=np.int64)] = True
    return not g.m or not np.any(mask[g.edges[:, 0]] & mask[g.edges[:, 1]])


def is_matching(g: WeightedGraph, edge_ids) -> bool:
    ends = g.edges[np.asarray(edge_ids, dtype=np.int64)].ravel()
    return np.unique(ends).size == ends.size


def line_graph(g: WeightedGraph) -> WeightedGraph:
    """Conflict graph on edges; node ``i`` is ``g.edges[i]`` weighted by its edge weight."""
    inc = sparse.csr_matrix(
        (np.ones(2 * g.m), (g.edges.ravel(), np.repeat(np.arange(g.m), 2))), shape=(g.n, g.m)
    )
    conflict = sparse.triu(inc.T @ inc, k=1).tocoo()
    pairs = np.stack((conflict.row, conflict.col), axis=1)
    return WeightedGraph(g.m, pairs, node_weights=edge_weights_of(g))


# -- brute force -------------------------------------------------------------


def _subset_table(k: int, edges: np.ndarray, w: np.ndarray):
    """Weight and independence of every subset of ``k`` vertices (bitmask indexed)."""
    masks = np.arange(1 << k, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(k)) & 1
    weight = bits @ w if k else np.zeros(1)
    ok = np.ones(masks.size, dtype=bool)
    for u, v in edges:
        ok &= ((masks >> u) & (masks >> v) & 1) == 0
    return masks, bits, weight, ok


def _mwis_exhaustive(n: int, edges: np.ndarray, w: np.ndarray) -> tuple[float, int]:
    """Meet-in-the-middle enumeration of all independent sets; returns (value, bitmask)."""
    h = n // 2
    k = n - h
    in_a = np.all(edges < h, axis=1)
    in_b = np.all(edges >= h, axis=1)
    cross = edges[~in_a & ~in_b]
    _, bits_a, w_a, ok_a = _subset_table(h, edges[in_a], w[:h])
    _, _, w_b, ok_b = _subset_table(k, edges[in_b] - h, w[h:])
    # best[T] = heaviest independent subset of T, by a max-over-subsets sweep
    best = np.where(ok_b, w_b, -np.inf)
    arg = np.arange(1 << k, dtype=np.int64)
    for j in range(k):
        view = best.reshape(-1, 2, 1 << j)
        aview = arg.reshape(-1, 2, 1 << j)
        better = view[:, 0, :] > view[:, 1, :]
        view[:, 1, :] = np.where(better, view[:, 0, :], view[:, 1, :])
        aview[:, 1, :] = np.where(better, aview[:, 0, :], aview[:, 1, :])
    blocked = np.zeros(1 << h, dtype=np.int64)
    for a, b in cross:
        lo, hi = (a, b) if a < h else (b, a)
        blocked |= np.where(bits_a[:, lo] == 1, 1 << (hi - h), 0)
    free = ((1 << k) - 1) & ~blocked
    total = np.where(ok_a, w_a + best[free], -np.inf)
    i = int(np.argmax(total))
    return float(total[i]), i | (int(arg[free[i]]) << h)


def _bits_to_array(mask: int) -> np.ndarray:
    return np.array([i for i in range(mask.bit_length()) if mask >> i & 1], dtype=np.int64)


def mwis_bruteforce(g: WeightedGraph) -> SolveResult:
    if g.n > BRUTE_NODE_LIMIT:
        raise SolverDomainError(f"brute force supports n <= {BRUTE_NODE_LIMIT}, got {g.n}")
    w = node_weights_of(g)
    value, mask = _mwis_exhaustive(g.n, g.edges, w)
    chosen = _bits_to_array(mask)
    return SolveResult(float(w[chosen].sum()), chosen)


def mwm_bruteforce(g: WeightedGraph) -> SolveResult:
    if g.m > BRUTE_NODE_LIMIT:
        raise SolverDomainError(f"brute force supports at most {BRUTE_NODE_LIMIT} edges, got {g.m}")
    res = mwis_bruteforce(line_graph(g))
    return SolveResult(res.value, res.chosen)


# -- branch and bound --------------------------------------------------------


class _OutOfTime(Exception):
    pass


def _iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _BitsetSearch:
    """Depth-first MWIS search on bitsets with a greedy weighted clique-cover bound."""

    def __init__(self, adj: list[int], w: list[float], deadline: float):
        self.adj = adj
        self.w = w
        self.order = sorted(range(len(adj)), key=lambda v: -w[v])
        self.deadline = deadline
        self.best_value = 0.0
        self.best_set = 0
        self.visited = 0

    def greedy(self, P: int) -> None:
        value, chosen = 0.0, 0
        adj, w = self.adj, self.w
        for v in sorted(_iter_bits(P), key=lambda v: -w[v] / (1 + (adj[v] & P).bit_count())):
            if P >> v & 1:
                value += w[v]
                chosen |= 1 << v
                P &= ~(adj[v] | (1 << v))
        if value > self.best_value:
            self.best_value, self.best_set = value, chosen

    def bound(self, P: int) -> float:
        adj, w = self.adj, self.w
        total = 0.0
        for v in self.order:
            if not P >> v & 1:
                continue
            P ^= 1 << v
            total += w[v]
            cand = adj[v] & P
            while cand:
                u = max(_iter_bits(cand), key=w.__getitem__)
                P &= ~(1 << u)
                cand &= adj[u]
        return total

    def reduce(self, P: int, cur: float, S: int):
        # take any vertex at least as heavy as its remaining neighbourhood
        adj, w = self.adj, self.w
        changed = True
        while changed:
            changed = False
            for v in _iter_bits(P):
                if not P >> v & 1:
                    continue
                nb = adj[v] & P
                if w[v] >= sum(w[u] for u in _iter_bits(nb)):
                    P &= ~(nb | (1 << v))
                    cur += w[v]
                    S |= 1 << v
                    changed = True
        return P, cur, S

    def search(self, P: int, cur: float = 0.0, S: int = 0) -> None:
        self.visited += 1
        if not self.visited & 255 and time.perf_counter() > self.deadline:
            raise _OutOfTime
        P, cur, S = self.reduce(P, cur, S)
        if not P:
            if cur > self.best_value:
                self.best_value, self.best_set = cur, S
            return
        if cur + self.bound(P) <= self.best_value + TIE_TOL:
            return
        adj, w = self.adj, self.w
        v = max(_iter_bits(P), key=lambda x: ((adj[x] & P).bit_count(), w[x]))
        b = 1 << v
        self.search(P & ~(adj[v] | b), cur + w[v], S | b)
        self.search(P & ~b, cur, S)


def mwis_bnb(g: WeightedGraph, time_budget: float = BNB_TIME_BUDGET) -> SolveResult:
    """Exact MWIS by branch and bound, one connected component at a time.

    On budget exhaustion the best set found so far is returned with ``exact=False``.
    """
    if g.n > BNB_NODE_LIMIT:
        raise SolverDomainError(f"branch and bound supports n <= {BNB_NODE_LIMIT}, got {g.n}")
    if g.n and g.degrees().max() > BNB_DEGREE_LIMIT:
        raise SolverDomainError(f"branch and bound supports max degree <= {BNB_DEGREE_LIMIT}")
    w = node_weights_of(g)
    adj = [0] * g.n
    for u, v in g.edges.tolist():
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    deadline = time.perf_counter() + time_budget
    solver = _BitsetSearch(adj, w.tolist(), deadline)
    labels, _, _ = component_labels(g)
    chosen = 0
    exact = True
    for lab in range(int(labels.max()) + 1 if g.n else 0):
        P = sum(1 << int(v) for v in np.flatnonzero((labels == lab) & (w > 0)))
        solver.best_value, solver.best_set = 0.0, 0
        solver.greedy(P)
        if exact:
            try:
                solver.search(P)
            except _OutOfTime:
                exact = False
        chosen |= solver.best_set
    nodes = _bits_to_array(chosen)
    return SolveResult(float(w[nodes].sum()), nodes, exact)


# -- forests and low-excess components ----------------------------------------

#: Largest cycle excess the conditioning DP enumerates (2^k tree passes).
MAX_CONDITION_EXCESS = 10


@dataclass
class _SpanningForest:
    """BFS forest hung from a virtual root ``n``, plus the edges left out of it."""

    n: int
    labels: np.ndarray
    order: np.ndarray
    parent: np.ndarray
    parent_edge: np.ndarray
    extra: np.ndarray  # non-tree edge ids
    extra_label: np.ndarray
    extra_rank: np.ndarray  # index of the edge among its component's non-tree edges
    excess: np.ndarray  # per component


def _spanning_forest(g: WeightedGraph, max_excess: int) -> _SpanningForest:
    n = g.n
    labels, sizes, edge_counts = component_labels(g)
    excess = edge_counts - sizes + 1
    if np.any(excess > max_excess):
        raise SolverDomainError(f"a component has cycle excess above {max_excess}")
    _, reps = np.unique(labels, return_index=True)
    e = g.edges
    rows = np.concatenate((e[:, 0], e[:, 1], np.full(reps.size, n), reps))
    cols = np.concatenate((e[:, 1], e[:, 0], reps, np.full(reps.size, n)))
    adj = sparse.csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n + 1, n + 1))
    order, pred = csgraph.breadth_first_order(adj, n, directed=True, return_predecessors=True)
    parent = pred.astype(np.int64)
    parent[n] = n
    if g.m:
        tree = (parent[e[:, 0]] == e[:, 1]) | (parent[e[:, 1]] == e[:, 0])
    else:
        tree = np.zeros(0, dtype=bool)
    extra = np.flatnonzero(~tree)
    extra_label = labels[e[extra, 0]] if extra.size else np.zeros(0, np.int64)
    # rank within component: extra edges are sorted by id, so count earlier ones per label
    by_label = np.argsort(extra_label, kind="stable")
    first = np.searchsorted(extra_label[by_label], extra_label[by_label])
    rank = np.empty(extra.size, dtype=np.int64)
    rank[by_label] = np.arange(extra.size) - first
    p = parent[:n]
    code = np.minimum(np.arange(n), p) * (n + 1) + np.maximum(np.arange(n), p)
    pos = np.searchsorted(e[:, 0] * (n + 1) + e[:, 1], code)
    pe = np.where(p == n, -1, np.minimum(pos, max(g.m - 1, 0)))
    return _SpanningForest(n, labels, order.astype(np.int64), parent, pe, extra, extra_label, rank, excess)


def _bonus_pass_ind(order: list, parent: list, w: list) -> list:
    # bottom-up: B_v = max(0, w_v - sum of child bonuses)
    size = len(w)
    bonus = [0.0] * size
    child_sum = [0.0] * size
    for v in reversed(order):
        b = w[v] - child_sum[v]
        if b > 0:
            bonus[v] = b
            child_sum[parent[v]] += b
    return bonus


def _bonus_pass_match(order: list, parent: list, we: list) -> tuple[list, list]:
    # bottom-up: B_v = max(0, max over children c of w_vc - B_c)
    size = len(we)
    best = [0.0] * size
    arg = [-1] * size
    for v in reversed(order):
        c = we[v] - best[v]
        p = parent[v]
        if c > best[p]:
            best[p] = c
            arg[p] = v
    return best, arg


def _ind_weights(sf, g, w, choice) -> np.ndarray:
    """Zero one endpoint of every non-tree edge: bit ``rank`` of the component's choice picks which."""
    out = w.copy()
    ends = g.edges[sf.extra]
    bit = (choice[sf.extra_label] >> sf.extra_rank) & 1
    out[np.where(bit == 1, ends[:, 1], ends[:, 0])] = 0.0
    return out


def _match_weights(sf, g, we, choice):
    """Tree edge weights with used non-tree edges' endpoints blocked, and the used edges."""
    out = we.copy()
    used = sf.extra[((choice[sf.extra_label] >> sf.extra_rank) & 1) == 1]
    hit = np.zeros(sf.n + 1, dtype=bool)
    hit[g.edges[used].ravel()] = True
    hit[sf.n] = False
    out[:sf.n][hit[sf.parent[:sf.n]]] = 0.0
    out[:sf.n][hit[:sf.n]] = 0.0
    return out, used


def _conditioned_search(sf, run_pass, k: int):
    """Try every conditioning ``j < 2^excess`` per component; return the best choice per component."""
    best_val = np.full(k, -np.inf)
    best_choice = np.zeros(k, dtype=np.int64)
    for j in range(1 << int(sf.excess.max(initial=0))):
        active = (1 << sf.excess) > j
        choice = np.where(active, j, 0)
        vals = run_pass(choice, active)
        better = active & (vals > best_val)
        best_val[better] = vals[better]
        best_choice[better] = j
    return best_choice


def _mwis_conditioned(g: WeightedGraph, max_excess: int) -> SolveResult:
    sf = _spanning_forest(g, max_excess)
    n, k = g.n, sf.excess.size
    w = np.append(node_weights_of(g), 0.0)
    order = sf.order[1:]
    parent = sf.parent.tolist()

    def run_pass(choice, active):
        sub = order[active[sf.labels[order]]]
        bonus = np.array(_bonus_pass_ind(sub.tolist(), parent, _ind_weights(sf, g, w, choice).tolist()))
        return np.bincount(sf.labels, weights=bonus[:n], minlength=k)

    choice = _conditioned_search(sf, run_pass, k) if sf.extra.size else np.zeros(k, dtype=np.int64)
    bonus = _bonus_pass_ind(order.tolist(), parent, _ind_weights(sf, g, w, choice).tolist())
    # top-down: take a node when its parent is out and its bonus is positive
    inset = [False] * (n + 1)
    for v in order.tolist():
        if bonus[v] > 0 and not inset[parent[v]]:
            inset[v] = True
    chosen = np.flatnonzero(inset[:n])
    return SolveResult(float(w[chosen].sum()), chosen)


def _mwm_conditioned(g: WeightedGraph, max_excess: int) -> SolveResult:
    sf = _spanning_forest(g, max_excess)
    n, k = g.n, sf.excess.size
    ew = edge_weights_of(g)
    we = np.zeros(n + 1)
    has_pe = sf.parent_edge >= 0
    we[:n][has_pe] = ew[sf.parent_edge[has_pe]]
    order = sf.order[1:]
    parent = sf.parent.tolist()

    def run_pass(choice, active):
        wj, used = _match_weights(sf, g, we, choice)
        sub = order[active[sf.labels[order]]]
        best, _ = _bonus_pass_match(sub.tolist(), parent, wj.tolist())
        vals = np.bincount(sf.labels, weights=np.array(best)[:n], minlength=k)
        lab = sf.labels[g.edges[used, 0]]
        vals += np.bincount(lab, weights=ew[used], minlength=k)
        # the used non-tree edges must themselves be disjoint
        ends = g.edges[used].ravel()
        clash = np.bincount(ends, minlength=n) > 1
        vals[np.unique(sf.labels[np.flatnonzero(clash)])] = -np.inf
        return vals

    choice = _conditioned_search(sf, run_pass, k) if sf.extra.size else np.zeros(k, dtype=np.int64)
    wj, used = _match_weights(sf, g, we, choice)
    _, arg = _bonus_pass_match(order.tolist(), parent, wj.tolist())
    matched = [False] * (n + 1)
    chosen = used.tolist()
    pe = sf.parent_edge.tolist()
    for v in order.tolist():
        p = parent[v]
        if p != n and arg[p] == v and not matched[p]:
            matched[p] = matched[v] = True
            chosen.append(pe[v])
    chosen = np.sort(np.array(chosen, dtype=np.int64))
    return SolveResult(float(ew[chosen].sum()), chosen)


def mwis_forest_unicyclic(g: WeightedGraph) -> SolveResult:
    """Exact MWIS when every component is a tree or has exactly one cycle.

    The optimum of a forest is the sum of all bonuses.  A unicyclic component
    left with non-tree edge ``(a, b)`` is solved twice, once with ``a`` and
    once with ``b`` priced at zero, and the better run is kept.
    """
    return _mwis_conditioned(g, 1)


def mwm_forest_unicyclic(g: WeightedGraph) -> SolveResult:
    """Exact max-weight matching when every component has at most one cycle.

    The non-tree edge of a unicyclic component is either unused, or used with
    the other edges at its endpoints priced at zero.
    """
    return _mwm_conditioned(g, 1)


# -- dispatch ------------------------------------------------------------------


def _bnb_fits(sub: WeightedGraph, objective: Objective) -> bool:
    if objective is Objective.INDEPENDENT_SET:
        return sub.n <= BNB_NODE_LIMIT and sub.degrees().max(initial=0) <= BNB_DEGREE_LIMIT
    deg = sub.degrees()
    line_deg = (deg[sub.edges[:, 0]] + deg[sub.edges[:, 1]] - 2).max(initial=0)
    return sub.m <= BNB_NODE_LIMIT and line_deg <= BNB_DEGREE_LIMIT


def _solve_by_component(g: WeightedGraph, objective: Objective, time_budget: float) -> SolveResult:
    """Low-excess components by conditioned DP, the rest by branch and bound."""
    ind = objective is Objective.INDEPENDENT_SET
    labels, sizes, edge_counts = component_labels(g)
    hard = (edge_counts - sizes + 1) > MAX_CONDITION_EXCESS
    easy_nodes = np.flatnonzero(~hard[labels]) if g.n else np.zeros(0, np.int64)
    easy, _ = g.subgraph(easy_nodes)
    parts = [(easy_nodes, easy, True)]
    for lab in np.flatnonzero(hard):
        nodes = np.flatnonzero(labels == lab)
        parts.append((nodes, g.subgraph(nodes)[0], False))
    deadline = time.perf_counter() + time_budget
    value, exact, chosen = 0.0, True, []
    for nodes, sub, is_easy in parts:
        if is_easy:
            res = _mwis_conditioned(sub, MAX_CONDITION_EXCESS) if ind else _mwm_conditioned(sub, MAX_CONDITION_EXCESS)
        elif _bnb_fits(sub, objective):
            remaining = max(deadline - time.perf_counter(), 0.0)
            res = mwis_bnb(sub if ind else line_graph(sub), remaining)
        elif (sub.n if ind else sub.m) <= BRUTE_NODE_LIMIT:
            res = mwis_bruteforce(sub) if ind else mwm_bruteforce(sub)
        else:
            raise SolverDomainError(
                f"component with {sub.n} nodes and excess {sub.m - sub.n + 1} is beyond every exact solver"
            )
        if ind:
            chosen.append(nodes[res.chosen])
        else:
            chosen.append(g.edge_indices(nodes[sub.edges[res.chosen]]))
        value += res.value
        exact &= res.exact
    return SolveResult(value, np.sort(np.concatenate(chosen)), exact)


def solve(g: WeightedGraph, objective: Objective, method: str = "auto", time_budget: float = BNB_TIME_BUDGET) -> SolveResult:
    ind = objective is Objective.INDEPENDENT_SET
    if method == "brute":
        return mwis_bruteforce(g) if ind else mwm_bruteforce(g)
    if method == "dp":
        return mwis_forest_unicyclic(g) if ind else mwm_forest_unicyclic(g)
    if method == "bnb":
        if ind:
            return mwis_bnb(g, time_budget)
        res = mwis_bnb(line_graph(g), time_budget)
        return SolveResult(res.value, res.chosen, res.exact)
    if method == "ks":
        if ind:
            raise SolverDomainError("the ks method solves matchings only")
        return karp_sipser_matching(g, time_budget)
    if method == "auto":
        return _solve_by_component(g, objective, time_budget)
    raise SolverDomainError(f"unknown method {method!r}")


# -- tree bonus with boundary conditions ---------------------------------------


class LeafStatus(enum.Enum):
    FORCED_IN = "in"
    FORCED_OUT = "out"


class RootStatus(enum.Enum):
    IN = "In"
    OUT = "Out"
    TIE = "Tie"


@dataclass(frozen=True)
class BoundaryCondition:
    """Per boundary leaf: its status and pinned weight.

    For matchings the pinned weight belongs to the leaf's pendant edge.
    A ForcedIn leaf keeps its pinned weight in play; a ForcedOut leaf (or its
    pendant edge) is removed.
    """

    leaves: dict = field(default_factory=dict)

    @classmethod
    def uniform(cls, leaves, status: LeafStatus, weights) -> "BoundaryCondition":
        return cls({int(v): (status, float(x)) for v, x in zip(leaves, weights)})

    @classmethod
    def empty(cls) -> "BoundaryCondition":
        return cls({})

    def forced_in(self) -> list[int]:
        return [v for v, (s, _) in self.leaves.items() if s is LeafStatus.FORCED_IN]


@dataclass(frozen=True)
class TreeBonus:
    bonus: float
    root_in_optimum: RootStatus


def _rooted(tree: WeightedGraph, root: int):
    if tree.m != tree.n - 1 or component_labels(tree)[1].size != 1:
        raise SolverDomainError("tree_bonus needs a tree")
    parent = [-1] * tree.n
    order = [root]
    parent[root] = root
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in tree.neighbors(u).tolist():
            if parent[v] == -1:
                parent[v] = u
                order.append(v)
                queue.append(v)
    return order, parent


def _check_boundary(tree: WeightedGraph, root: int, parent: list, boundary: BoundaryCondition, objective: Objective):
    deg = tree.degrees()
    for v in boundary.leaves:
        if v == root or deg[v] != 1:
            raise SolverDomainError(f"boundary node {v} is not a leaf")
    forced = boundary.forced_in()
    if objective is Objective.INDEPENDENT_SET:
        fs = set(forced)
        for v in forced:
            if parent[v] in fs:
                raise InfeasibleBoundary(f"ForcedIn leaves {v} and {parent[v]} are adjacent")
    else:
        parents = [parent[v] for v in forced]
        if len(set(parents)) != len(parents):
            raise InfeasibleBoundary("two ForcedIn pendant edges share a parent")


def _classify(x: float) -> RootStatus:
    if abs(x) <= TIE_TOL:
        return RootStatus.TIE
    return RootStatus.IN if x > 0 else RootStatus.OUT


def tree_bonus(tree: WeightedGraph, objective: Objective, boundary: BoundaryCondition | None = None, root: int = 0) -> TreeBonus:
    boundary = boundary or BoundaryCondition.empty()
    order, parent = _rooted(tree, root)
    _check_boundary(tree, root, parent, boundary, objective)
    bonus = [0.0] * tree.n
    if objective is Objective.INDEPENDENT_SET:
        w = node_weights_of(tree).tolist()
        child_sum = [0.0] * tree.n
        margin = 0.0
        for v in reversed(order):
            if v in boundary.leaves:
                status, pinned = boundary.leaves[v]
                b = pinned if status is LeafStatus.FORCED_IN else 0.0
            else:
                margin = w[v] - child_sum[v]
                b = max(0.0, margin)
            bonus[v] = b
            if v != root:
                child_sum[parent[v]] += b
        return TreeBonus(bonus[root], _classify(margin))
    ew = edge_weights_of(tree)
    best = [-np.inf] * tree.n
    for v in reversed(order):
        bonus[v] = max(0.0, best[v])
        if v == root:
            break
        p = parent[v]
        if v in boundary.leaves:
            status, pinned = boundary.leaves[v]
            if status is LeafStatus.FORCED_OUT:
                continue
            term = pinned
        else:
            term = float(ew[tree.edge_index(v, p)]) - bonus[v]
        best[p] = max(best[p], term)
    return TreeBonus(bonus[root], _classify(best[root]))


def constrained_bruteforce_bonus(tree: WeightedGraph, objective: Objective, boundary: BoundaryCondition, root: int = 0) -> float:
    """Root bonus from two exhaustive optima: with and without the root."""
    w = node_weights_of(tree).copy()
    ew = edge_weights_of(tree).copy()
    drop_edges = np.zeros(tree.m, dtype=bool)
    for v, (status, pinned) in boundary.leaves.items():
        if objective is Objective.INDEPENDENT_SET:
            w[v] = pinned
        else:
            i = tree.edge_index(v, int(tree.neighbors(v)[0]))
            ew[i] = pinned
            drop_edges[i] = status is LeafStatus.FORCED_OUT
    if objective is Objective.INDEPENDENT_SET:
        out = [v for v, (status, _) in boundary.leaves.items() if status is LeafStatus.FORCED_OUT]
        keep = np.setdiff1d(np.arange(tree.n), out)
        g = tree.with_weights(node_weights=w)
        full, _ = g.subgraph(keep)
        rootless, _ = g.subgraph(keep[keep != root])
        return mwis_bruteforce(full).value - mwis_bruteforce(rootless).value
    g = WeightedGraph(tree.n, tree.edges[~drop_edges], edge_weights=ew[~drop_edges])
    rootless, _ = g.subgraph(np.array([v for v in range(tree.n) if v != root]))
    return mwm_bruteforce(g).value - mwm_bruteforce(rootless).value


# -- regular trees H_r(d), batched ---------------------------------------------


def regular_tree_root_bonus(
    objective: Objective,
    r: int,
    d: int,
    weight: WeightSpec,
    statuses: tuple[LeafStatus, ...],
    n_trees: int,
    rng: np.random.Generator,
) -> dict:
    """Root bonuses of ``n_trees`` weighted copies of H_r(d), one sample per boundary status.

    Every status is evaluated on the same weights; ForcedIn leaves are pinned
    to their own sampled weight.  All-ForcedIn matching boundaries are
    infeasible once two leaves share a parent, as in :func:`tree_bonus`.
    """
    if d < 1 or r < 2:
        raise ValueError("need d >= 1 and r >= 2")
    sizes = [1] + [r * (r - 1) ** (i - 1) for i in range(1, d + 1)]
    fan = [r] + [r - 1] * (d - 1)  # children per node at level i
    if objective is Objective.MATCHING and LeafStatus.FORCED_IN in statuses and fan[d - 1] > 1:
        raise InfeasibleBoundary("ForcedIn pendant edges share a parent")
    weights = [sample_weight(weight, rng, (n_trees, s)) for s in sizes]
    out = {}
    for status in statuses:
        leaf_in = status is LeafStatus.FORCED_IN
        if objective is Objective.INDEPENDENT_SET:
            b = weights[d] if leaf_in else np.zeros((n_trees, sizes[d]))
            for i in range(d - 1, -1, -1):
                s = b.reshape(n_trees, sizes[i], fan[i]).sum(axis=2)
                b = np.maximum(0.0, weights[i] - s)
        else:
            # weights[i] for i >= 1 are the edges from level i up to its parent
            b = np.zeros((n_trees, sizes[d]))
            term = weights[d] - b if leaf_in else np.zeros_like(b)
            for i in range(d - 1, -1, -1):
                b = np.maximum(0.0, term.reshape(n_trees, sizes[i], fan[i]).max(axis=2))
                if i:
                    term = weights[i] - b
        out[status] = b[:, 0]
    return out


# -- Karp-Sipser -----------------------------------------------------------------


@dataclass(frozen=True)
class KarpSipserResult:
    matching: np.ndarray
    stage1_cover: np.ndarray
    remainder: WeightedGraph
    remainder_nodes: np.ndarray


def karp_sipser(g: WeightedGraph) -> KarpSipserResult:
    """Stage 1 leaf removal: match each leaf to its neighbour until no leaf is left."""
    deg = g.degrees().tolist()
    alive = [True] * g.n
    indptr, indices, eids = g.indptr.tolist(), g.indices.tolist(), g.edge_ids.tolist()
    leaves = deque(v for v in range(g.n) if deg[v] == 1)
    matching, cover = [], []

    def remove(x):
        alive[x] = False
        for j in range(indptr[x], indptr[x + 1]):
            y = indices[j]
            if alive[y]:
                deg[y] -= 1
                if deg[y] == 1:
                    leaves.append(y)

    while leaves:
        v = leaves.popleft()
        if not alive[v] or deg[v] != 1:
            continue
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            if alive[u]:
                break
        matching.append(eids[j])
        cover.append(u)
        alive[v] = False
        remove(u)
    keep = np.flatnonzero(np.array(alive, dtype=bool) & (np.array(deg) >= 2)) if g.n else np.zeros(0, np.int64)
    remainder, _ = g.subgraph(keep)
    return KarpSipserResult(np.sort(np.array(matching, dtype=np.int64)), np.array(cover, dtype=np.int64), remainder, keep)


def karp_sipser_matching(g: WeightedGraph, time_budget: float = BNB_TIME_BUDGET) -> SolveResult:
    """Maximum-cardinality matching: stage 1 leaf removal, then an exact solve of the remainder."""
    ks = karp_sipser(g)
    unit = ks.remainder.with_weights(edge_weights=np.ones(ks.remainder.m))
    rest = _solve_by_component(unit, Objective.MATCHING, time_budget)
    extra = g.edge_indices(ks.remainder_nodes[ks.remainder.edges[rest.chosen]])
    chosen = np.sort(np.concatenate((ks.matching, extra)))
    return SolveResult(float(chosen.size), chosen, rest.exact)
