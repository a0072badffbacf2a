"""Minimum-loss edge-disjoint route pairs from the source to every node pair.

Both photons of a pair share one wavelength, so the two light-paths from the
generator to the memories of nodes ``i`` and ``j`` may not share an arc.  A
dummy sink fed by zero-loss arcs from both memories turns this into a
two-path problem between the generator and the sink, solved with Suurballe's
algorithm: a shortest path, reduced costs, a second shortest path in the
residual graph, and cancellation of the arcs the second path traverses
backwards.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _cs_dijkstra

from .errors import ConfigError, RoutingError
from .netgraph import ExpandedGraph, transmittance


@dataclass(frozen=True)
class RoutePair:
    pair: tuple[int, int]
    path_i: tuple[int, ...]
    path_j: tuple[int, ...]
    loss_db: float
    eta: float


@dataclass
class RouteTable:
    graph: ExpandedGraph
    pairs: list[tuple[int, int]]
    routes: dict
    loss_db: np.ndarray
    lam: np.ndarray

    @property
    def kappa(self) -> int:
        return len(self.pairs)

    def pair_labels(self) -> list[str]:
        labels = self.graph.topology.labels
        return [f"{labels[i]}-{labels[j]}" for i, j in self.pairs]

    def to_csv(self, path) -> None:
        g = self.graph
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pair", "loss_db", "eta", "path_i", "path_j"])
            for name, p in zip(self.pair_labels(), self.pairs):
                r = self.routes[p]
                writer.writerow([name, repr(r.loss_db), repr(r.eta), g.path_label(r.path_i), g.path_label(r.path_j)])


def _dijkstra(n: int, adj, src: int):
    """Heap Dijkstra; ``adj[u]`` lists ``(v, cost, tag)``.  Ties pop lowest vertex id."""
    dist = [math.inf] * n
    pred = [None] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    done = [False] * n
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, c, tag in adj[u]:
            nd = du + c
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = (u, tag)
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _walk_back(pred, target: int) -> list:
    tags = []
    v = target
    while pred[v] is not None:
        u, tag = pred[v]
        tags.append(tag)
        v = u
    tags.reverse()
    return tags


def _split_flow(tails, heads, flow_arcs, start: int, ends: set) -> list[list[int]]:
    """Decompose a two-unit arc set leaving ``start`` into two paths ending in ``ends``."""
    outgoing: dict[int, list[int]] = {}
    for a in sorted(flow_arcs):
        outgoing.setdefault(tails[a], []).append(a)
    paths = []
    for _ in range(2):
        path, v = [], start
        while v not in ends:
            a = outgoing[v].pop(0)
            path.append(a)
            v = heads[a]
        paths.append(path)
    return paths


def _check_pair(graph: ExpandedGraph, i, j) -> tuple[int, int]:
    i, j = graph.topology.index(i), graph.topology.index(j)
    if i == j:
        raise ConfigError("a node pair needs two distinct nodes")
    return i, j


def _make_route(graph: ExpandedGraph, i: int, j: int, p_i, p_j) -> RoutePair:
    if i > j:
        i, j, p_i, p_j = j, i, p_j, p_i
    loss = graph.path_loss(p_i) + graph.path_loss(p_j)
    return RoutePair((i, j), tuple(int(a) for a in p_i), tuple(int(a) for a in p_j), loss, transmittance(loss))


def shortest_disjoint_pair(graph: ExpandedGraph, i, j) -> RoutePair:
    """Two arc-disjoint generator-to-memory paths of minimum total loss.

    Runs Suurballe's algorithm on the graph augmented with a dummy sink
    reached from ``mem(i)`` and ``mem(j)`` by zero-loss arcs.
    """
    i, j = _check_pair(graph, i, j)
    nv, na = graph.n_vertices, graph.n_arcs
    sink = nv
    tails = list(graph.tail) + [graph.mem(i), graph.mem(j)]
    heads = list(graph.head) + [sink, sink]
    weights = list(graph.weight) + [0.0, 0.0]

    adj = [[] for _ in range(nv + 1)]
    for a in range(na + 2):
        adj[tails[a]].append((heads[a], weights[a], a))
    dist, pred = _dijkstra(nv + 1, adj, graph.gen)
    if math.isinf(dist[sink]):
        raise RoutingError((graph.topology.labels[i], graph.topology.labels[j]), "memory unreachable")
    first = _walk_back(pred, sink)
    on_first = set(first)

    radj = [[] for _ in range(nv + 1)]
    for a in range(na + 2):
        u, v = tails[a], heads[a]
        if math.isinf(dist[u]):
            continue
        if a in on_first:
            radj[v].append((u, 0.0, (a, -1)))
        else:
            radj[u].append((v, max(0.0, weights[a] + dist[u] - dist[v]), (a, 1)))
    _, rpred = _dijkstra(nv + 1, radj, graph.gen)
    if rpred[sink] is None:
        raise RoutingError((graph.topology.labels[i], graph.topology.labels[j]), "no second disjoint path")
    second = _walk_back(rpred, sink)

    flow = set(on_first)
    for a, direction in second:
        if direction > 0:
            flow.add(a)
        else:
            flow.discard(a)
    mem_i, mem_j = graph.mem(i), graph.mem(j)
    paths = _split_flow(tails, heads, flow, graph.gen, {sink})
    paths = [p[:-1] for p in paths]  # drop the dummy arc
    if heads[paths[0][-1]] != mem_i:
        paths.reverse()
    p_i, p_j = paths
    if (heads[p_i[-1]], heads[p_j[-1]]) != (mem_i, mem_j):
        raise RoutingError((i, j), "flow decomposition did not end at both memories")
    return _make_route(graph, i, j, p_i, p_j)


class _BatchRouter:
    """All route pairs for one graph, sharing shortest-path work between pairs.

    For a pair whose closer endpoint is ``i`` the first Suurballe path is the
    shortest path to ``mem(i)``, so a single residual search from the
    generator serves every partner ``j`` of ``i``.  The dummy sink never lies
    on a useful residual path and is left out.
    """

    def __init__(self, graph: ExpandedGraph):
        self.g = graph
        self.nv = graph.n_vertices
        self.tail = graph.tail
        self.head = graph.head
        self.w = graph.weight
        self.arc_of = {(int(u), int(v)): a for a, (u, v) in enumerate(zip(self.tail, self.head))}
        base = sp.csr_matrix((self.w, (self.tail, self.head)), shape=(self.nv, self.nv))
        self.dist, pred = _cs_dijkstra(base, directed=True, indices=graph.gen, return_predecessors=True)
        self.pred = pred

    def tree_path(self, v: int) -> list[int]:
        arcs = []
        while v != self.g.gen:
            u = int(self.pred[v])
            if u < 0:
                return None
            arcs.append(self.arc_of[u, v])
            v = u
        arcs.reverse()
        return arcs

    def _residual_structure(self):
        # every arc plus its reversal, in CSR order; reversals start disabled
        na = len(self.tail)
        rows = np.concatenate([self.tail, self.head])
        cols = np.concatenate([self.head, self.tail])
        order = np.lexsort((cols, rows))
        self.slot = np.empty(2 * na, dtype=np.int64)
        self.slot[order] = np.arange(2 * na)
        indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=self.nv))])
        self.res_indices = cols[order].astype(np.int32)
        self.res_indptr = indptr.astype(np.int32)
        d = self.dist
        with np.errstate(invalid="ignore"):  # arcs between unreachable vertices
            reduced = np.where(
                np.isfinite(d[self.tail]), np.maximum(0.0, self.w + d[self.tail] - d[self.head]), np.inf
            )
        self.res_base = np.empty(2 * na)
        self.res_base[self.slot[:na]] = reduced
        self.res_base[self.slot[na:]] = np.inf

    def residual_search(self, first: list[int]):
        if not hasattr(self, "slot"):
            self._residual_structure()
        na = len(self.tail)
        data = self.res_base.copy()
        first = np.asarray(first, dtype=np.int64)
        data[self.slot[first]] = np.inf
        data[self.slot[first + na]] = 0.0
        res = sp.csr_matrix((data, self.res_indices, self.res_indptr), shape=(self.nv, self.nv))
        rdist, rpred = _cs_dijkstra(res, directed=True, indices=self.g.gen, return_predecessors=True)
        return np.where(np.isfinite(rdist), rpred, -1)

    def pair(self, i: int, j: int, first: list[int], rpred) -> RoutePair:
        g = self.g
        mem_i, mem_j = g.mem(i), g.mem(j)
        backward = {(int(self.head[a]), int(self.tail[a])): a for a in first}
        flow = set(first)
        v = mem_j
        while v != g.gen:
            u = int(rpred[v])
            if u < 0:
                raise RoutingError((g.topology.labels[i], g.topology.labels[j]), "no second disjoint path")
            if (u, v) in backward:
                flow.discard(backward[u, v])
            else:
                flow.add(self.arc_of[u, v])
            v = u
        paths = _split_flow(self.tail, self.head, flow, g.gen, {mem_i, mem_j})
        if self.head[paths[0][-1]] != mem_i:
            paths.reverse()
        return _make_route(g, i, j, paths[0], paths[1])


def route_all(graph: ExpandedGraph, topology=None, *, nodes=None) -> RouteTable:
    """Route every unordered node pair; pairs are ordered lexicographically by index.

    ``nodes`` restricts the consumers to a subset (default: all nodes).
    """
    topology = topology or graph.topology
    nodes = sorted(topology.index(v) for v in nodes) if nodes is not None else list(range(topology.n))
    pairs = list(combinations(nodes, 2))
    router = _BatchRouter(graph)
    mem_dist = {v: router.dist[graph.mem(v)] for v in nodes}
    for v in nodes:
        if not np.isfinite(mem_dist[v]):
            raise RoutingError((topology.labels[v],), "memory unreachable from the generator")
    order = sorted(nodes, key=lambda v: (mem_dist[v], v))
    rank = {v: r for r, v in enumerate(order)}
    routes = {}
    for i in order:
        partners = [j for j in nodes if rank[j] > rank[i]]
        if not partners:
            continue
        first = router.tree_path(graph.mem(i))
        rpred = router.residual_search(first)
        for j in partners:
            try:
                r = router.pair(i, j, first, rpred)
            except RoutingError as exc:
                raise RoutingError((topology.labels[min(i, j)], topology.labels[max(i, j)]), str(exc)) from exc
            routes[r.pair] = r
    loss = np.array([routes[p].loss_db for p in pairs])
    lam = np.array([routes[p].eta for p in pairs])
    return RouteTable(graph, pairs, routes, loss, lam)
