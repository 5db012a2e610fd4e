"""Sparse random graphs with node and edge weights.

Graphs are stored as a canonical edge array (``u < v``, lexicographically
sorted) plus a CSR adjacency built from it, so neighbour lists are sorted.
Edge weights are aligned with the edge array.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from rdelimits.weights import WeightSpec, sample_weight

#: Restarts allowed when pairing half-edges produces loops or multi-edges.
REGULAR_RETRY_CAP = 10_000


class Target(enum.Enum):
    NODES = "nodes"
    EDGES = "edges"


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    n: int
    edges: np.ndarray
    node_weights: np.ndarray | None = None
    edge_weights: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)
    edge_ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.sort(np.asarray(self.edges, dtype=np.int64).reshape(-1, 2), axis=1)
        perm = np.lexsort((e[:, 1], e[:, 0]))
        e = e[perm]
        object.__setattr__(self, "edges", e)
        if self.edge_weights is not None:
            if len(self.edge_weights) != len(e):
                raise GraphError("edge_weights must have one entry per edge")
            object.__setattr__(self, "edge_weights", np.asarray(self.edge_weights, dtype=float)[perm])
        if self.node_weights is not None:
            object.__setattr__(self, "node_weights", np.asarray(self.node_weights, dtype=float))
        src = np.concatenate((e[:, 0], e[:, 1]))
        dst = np.concatenate((e[:, 1], e[:, 0]))
        eid = np.concatenate((np.arange(len(e)), np.arange(len(e))))
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", dst[order])
        object.__setattr__(self, "edge_ids", eid[order])
        if self.node_weights is not None and len(self.node_weights) != self.n:
            raise GraphError("node_weights must have one entry per node")

    @property
    def m(self) -> int:
        return int(len(self.edges))

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def incident_edges(self, v: int) -> np.ndarray:
        return self.edge_ids[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency_lists(self) -> list:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edge_index(self, u: int, v: int) -> int:
        """Position of edge ``{u, v}`` in :attr:`edges`; KeyError if absent."""
        nb = self.neighbors(u)
        k = int(np.searchsorted(nb, v))
        if k == nb.size or nb[k] != v:
            raise KeyError((u, v))
        return int(self.edge_ids[self.indptr[u] + k])

    def edge_indices(self, pairs) -> np.ndarray:
        """Vectorized :meth:`edge_index` for an ``(k, 2)`` array of node pairs."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        codes = self.edges[:, 0] * self.n + self.edges[:, 1]
        want = pairs[:, 0] * self.n + pairs[:, 1]
        pos = np.searchsorted(codes, want)
        if np.any(pos >= self.m) or np.any(codes[np.minimum(pos, self.m - 1)] != want):
            raise KeyError("pair is not an edge")
        return pos

    def edge_weight(self, u: int, v: int) -> float:
        return float(self.edge_weights[self.edge_index(u, v)])

    def to_csr(self) -> sparse.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.int8)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def with_weights(self, node_weights=None, edge_weights=None) -> "WeightedGraph":
        return dataclasses.replace(
            self,
            node_weights=self.node_weights if node_weights is None else np.asarray(node_weights, float),
            edge_weights=self.edge_weights if edge_weights is None else np.asarray(edge_weights, float),
        )

    def is_simple(self) -> bool:
        e = self.edges
        if not e.size:
            return True
        if np.any(e[:, 0] == e[:, 1]):
            return False
        return not np.any(np.all(e[1:] == e[:-1], axis=1))

    def subgraph(self, nodes) -> tuple["WeightedGraph", np.ndarray]:
        """Induced subgraph on ``nodes`` relabelled ``0..k-1`` (in the given order)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[nodes] = np.arange(nodes.size)
        keep = (pos[self.edges[:, 0]] >= 0) & (pos[self.edges[:, 1]] >= 0) if self.m else np.zeros(0, bool)
        sub_edges = pos[self.edges[keep]] if self.m else np.zeros((0, 2), np.int64)
        nw = None if self.node_weights is None else self.node_weights[nodes]
        ew = None if self.edge_weights is None else self.edge_weights[keep]
        sub = WeightedGraph(int(nodes.size), sub_edges, nw, ew, dict(self.provenance))
        return sub, nodes


def _pair_index_to_edges(k: np.ndarray) -> np.ndarray:
    """Map linear indices over ``{(v, w): w < v}`` (ordered by v, then w) to pairs."""
    v = np.floor((1 + np.sqrt(1 + 8 * k.astype(np.float64))) / 2).astype(np.int64)
    # repair float rounding at triangular-number boundaries
    v -= (v * (v - 1) // 2) > k
    v += ((v + 1) * v // 2) <= k
    w = k - v * (v - 1) // 2
    return np.stack((w, v), axis=1)


def gen_gnp(n: int, c: float, rng: np.random.Generator) -> WeightedGraph:
    """Erdos-Renyi G(n, c/n) by geometric skipping over the ``n(n-1)/2`` pairs."""
    if n < 1:
        raise GraphError("n must be at least 1")
    if c < 0 or c > n:
        raise GraphError(f"need 0 <= c <= n, got c={c}, n={n}")
    prov = {"model": "poisson", "n": n, "c": c}
    total = n * (n - 1) // 2
    p = c / n
    if p == 0 or total == 0:
        return WeightedGraph(n, np.zeros((0, 2), np.int64), provenance=prov)
    if p >= 1:
        return WeightedGraph(n, _pair_index_to_edges(np.arange(total)), provenance=prov)
    chunks = []
    pos = -1
    batch = int(total * p + 6 * math.sqrt(total * p) + 16)
    while True:
        # geometric saturates at int64 max for tiny p; cap so the cumsum cannot wrap
        gaps = np.minimum(rng.geometric(p, batch), total + 1)
        idx = pos + np.cumsum(gaps)
        chunks.append(idx[idx < total])
        if idx[-1] >= total:
            break
        pos = int(idx[-1])
    k = np.concatenate(chunks)
    return WeightedGraph(n, _pair_index_to_edges(k), provenance=prov)


def gen_regular(n: int, r: int, rng: np.random.Generator) -> WeightedGraph:
    """Uniform simple ``r``-regular graph: configuration model, restarted until simple."""
    if (n * r) % 2:
        raise GraphError("n * r must be even")
    if not 0 <= r < n:
        raise GraphError("need 0 <= r < n")
    prov = {"model": "regular", "n": n, "r": r}
    stubs = np.repeat(np.arange(n, dtype=np.int64), r)
    for attempt in range(REGULAR_RETRY_CAP):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        code = pairs[:, 0] * n + pairs[:, 1]
        if np.unique(code).size != code.size:
            continue
        prov["attempts"] = attempt + 1
        return WeightedGraph(n, pairs, provenance=prov)
    raise GraphError(f"no simple {r}-regular pairing in {REGULAR_RETRY_CAP} attempts")


def gen_cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    u = np.arange(n, dtype=np.int64)
    return WeightedGraph(n, np.stack((u, (u + 1) % n), axis=1), provenance={"model": "cycle", "n": n})


def assign_weights(g: WeightedGraph, spec: WeightSpec, target: Target, rng: np.random.Generator) -> WeightedGraph:
    if target is Target.NODES:
        return g.with_weights(node_weights=sample_weight(spec, rng, g.n))
    return g.with_weights(edge_weights=sample_weight(spec, rng, g.m))


@dataclass(frozen=True)
class Component:
    nodes: np.ndarray
    edges: int

    @property
    def excess(self) -> int:
        return self.edges - self.nodes.size + 1


def component_labels(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node component label, node count and edge count per component."""
    _, labels = csgraph.connected_components(g.to_csr(), directed=False)
    k = int(labels.max()) + 1 if g.n else 0
    sizes = np.bincount(labels, minlength=k)
    edge_counts = np.bincount(labels[g.edges[:, 0]], minlength=k) if g.m else np.zeros(k, np.int64)
    return labels, sizes, edge_counts


def components(g: WeightedGraph) -> list[Component]:
    labels, _, edge_counts = component_labels(g)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(edge_counts.size + 1))
    return [Component(order[bounds[i] : bounds[i + 1]], int(edge_counts[i])) for i in range(edge_counts.size)]


@dataclass(frozen=True)
class Neighborhood:
    subgraph: WeightedGraph
    nodes: np.ndarray
    is_tree: bool
    boundary: np.ndarray


def neighborhood(g: WeightedGraph, v: int, d: int) -> Neighborhood:
    """Induced ball of radius ``d`` around ``v``; node 0 of the subgraph is ``v``."""
    if not 0 <= v < g.n:
        raise GraphError(f"node {v} out of range")
    dist = {v: 0}
    frontier = [v]
    for depth in range(1, d + 1):
        nxt = []
        for u in frontier:
            for w in g.neighbors(u).tolist():
                if w not in dist:
                    dist[w] = depth
                    nxt.append(w)
        frontier = nxt
    nodes = np.fromiter(dist.keys(), dtype=np.int64, count=len(dist))
    sub, nodes = g.subgraph(nodes)
    boundary = np.array([u for u, k in dist.items() if k == d], dtype=np.int64)
    return Neighborhood(sub, nodes, sub.m == sub.n - 1, boundary)


# -- edge-list text format --------------------------------------------------


def write_edgelist(g: WeightedGraph, path, node_weights_path=None) -> None:
    """Header ``n m`` then ``u v [weight]`` lines; node weights go to a separate one-column file."""
    lines = [f"{g.n} {g.m}"]
    ew = g.edge_weights
    for i, (u, v) in enumerate(g.edges.tolist()):
        lines.append(f"{u} {v}" if ew is None else f"{u} {v} {float(ew[i])!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)
    if node_weights_path is not None and g.node_weights is not None:
        Path(node_weights_path).write_text("".join(f"{x!r}\n" for x in g.node_weights.tolist()))


def read_edgelist(path, node_weights_path=None) -> WeightedGraph:
    rows = Path(path).read_text().split("\n")
    n, m = (int(x) for x in rows[0].split())
    edges = np.zeros((m, 2), dtype=np.int64)
    weights = []
    for i, row in enumerate(rows[1 : m + 1]):
        parts = row.split()
        edges[i] = int(parts[0]), int(parts[1])
        if len(parts) > 2:
            weights.append(float(parts[2]))
    if weights and len(weights) != m:
        raise GraphError("either every edge line carries a weight or none does")
    g = WeightedGraph(n, edges, edge_weights=weights or None, provenance={"source": str(path)})
    if node_weights_path is not None:
        nw = [float(x) for x in Path(node_weights_path).read_text().split()]
        g = g.with_weights(node_weights=nw)
    return g
