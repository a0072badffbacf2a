"""Network topologies: the Manhattan ILEC map, JSON files, and Watts-Strogatz graphs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import ConfigError, GenerationError, TopologyError

DEFAULT_ALPHA = 0.4  # dB/km, metro fiber plant

# Upper triangle of the as-the-crow-flies distance matrix (km) for the 17
# Manhattan ILEC sites; None marks pairs without a direct link.
_ILEC_LABELS = "ABCDEFGHIJKLMNOPQ"
_ILEC_ROWS = """
A 0 0.304 1.184 2.032 3.744 5.2 4.352 5.776 6.096 5.84 7.232 7.04 8.8 9.12 10.688 - -
B 0.304 0 0.912 1.712 3.488 5.056 4.048 5.488 5.936 5.296 6.848 6.656 8.496 8.816 10.32 - -
C 1.184 0.912 0 2.336 2.08 3.328 2.304 3.728 4.192 3.904 5.296 5.04 6.752 7.216 9.664 - -
D 2.032 1.712 2.336 0 2.224 3.36 2.368 3.728 2.192 4.0 5.392 4.992 6.848 7.216 8.768 - -
E 3.744 3.488 2.08 2.224 0 1.44 1.6 2.448 2.624 1.968 3.472 3.728 5.28 5.312 6.88 - -
F 5.2 5.056 3.328 3.36 1.44 0 1.696 1.536 1.36 0.544 2.0 2.528 4.0 3.872 5.456 - -
G 4.352 4.048 2.304 2.368 1.6 1.696 0 1.408 1.888 2.112 3.312 2.624 4.496 5.056 6.496 - -
H 5.776 5.488 3.728 3.728 2.448 1.536 1.408 0 0.624 1.408 2.176 1.28 3.04 3.696 5.152 - -
I 6.096 5.936 4.192 2.192 2.624 1.36 1.888 0.624 0 1.12 1.552 1.264 2.704 3.12 4.576 - -
J 5.84 5.296 3.904 4.0 1.968 0.544 2.112 1.408 1.12 0 1.376 2.288 3.424 3.296 4.832 - -
K 7.232 6.848 5.296 5.392 3.472 2.0 3.312 2.176 1.552 1.376 0 2.208 2.56 1.92 3.472 - -
L 7.04 6.656 5.04 4.992 3.728 2.528 2.624 1.28 1.264 2.288 2.208 0 1.872 3.2 4.256 - -
M 8.8 8.496 6.752 6.848 5.28 4.0 4.496 3.04 2.704 3.424 2.56 1.872 0 4.8 6.368 2.96 6.096
N 9.12 8.816 7.216 7.216 5.312 3.872 5.056 3.696 3.12 3.296 1.92 3.2 4.8 0 1.536 - 5.856
O 10.688 10.32 9.664 8.768 6.88 5.456 6.496 5.152 4.576 4.832 3.472 4.256 6.368 1.536 0 - 4.368
P - - - - - - - - - - - - 2.96 - - 0 3.04
Q - - - - - - - - - - - - 6.096 5.856 4.368 3.04 0
"""


@dataclass(frozen=True)
class Topology:
    """Undirected fiber network.

    ``edges`` holds ``(i, j, length_km)`` with ``i < j`` indexing ``labels``.
    """

    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    alpha: float = DEFAULT_ALPHA
    source: str | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, node) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n:
                raise ConfigError(f"node index {node} out of range")
            return int(node)
        try:
            return self.labels.index(node)
        except ValueError:
            raise ConfigError(f"unknown node {node!r}") from None

    def length(self, i, j) -> float | None:
        i, j = sorted((self.index(i), self.index(j)))
        return self._lengths().get((i, j))

    def _lengths(self) -> dict:
        return {(i, j): d for i, j, d in self.edges}

    def neighbors(self) -> list[list[int]]:
        nbrs = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return [sorted(v) for v in nbrs]

    def degrees(self) -> list[int]:
        return [len(v) for v in self.neighbors()]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges, weight="length")
        return g

    def to_dict(self) -> dict:
        out = {
            "labels": list(self.labels),
            "edges": [[i, j, d] for i, j, d in self.edges],
            "alpha_db_per_km": self.alpha,
        }
        if self.source is not None:
            out["source"] = self.source
        return out


def is_two_edge_connected(topology: Topology) -> bool:
    g = topology.to_networkx()
    return topology.n >= 2 and nx.is_connected(g) and not nx.has_bridges(g)


def validate(topology: Topology) -> Topology:
    """Raise :class:`TopologyError` unless the topology is admissible."""
    seen = set()
    for i, j, d in topology.edges:
        if i == j:
            raise TopologyError("self-loop", f"node {topology.labels[i]}")
        if not (0 <= i < topology.n and 0 <= j < topology.n):
            raise TopologyError("parse", f"edge ({i}, {j}) references unknown node")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise TopologyError("duplicate edge", f"{topology.labels[i]}-{topology.labels[j]}")
        seen.add(key)
        if not (isinstance(d, (int, float)) and np.isfinite(d) and d > 0):
            raise TopologyError("bad length", f"{topology.labels[i]}-{topology.labels[j]} = {d!r}")
    if len(set(topology.labels)) != topology.n:
        raise TopologyError("parse", "duplicate node labels")
    if not topology.alpha >= 0:
        raise TopologyError("parse", f"negative fiber loss {topology.alpha!r}")
    g = topology.to_networkx()
    if topology.n < 2 or not nx.is_connected(g):
        raise TopologyError("disconnected")
    if nx.has_bridges(g):
        raise TopologyError("min-cut<2", "the graph has a bridge edge")
    if topology.source is not None and topology.source not in topology.labels:
        raise TopologyError("parse", f"source {topology.source!r} is not a node")
    return topology


def make_topology(labels, edges, alpha: float = DEFAULT_ALPHA, source=None, check: bool = True) -> Topology:
    """Build a topology from edges given by label or index, normalising to i < j."""
    labels = tuple(str(x) for x in labels)
    norm = []
    for a, b, d in edges:
        i = labels.index(str(a)) if not isinstance(a, (int, np.integer)) else int(a)
        j = labels.index(str(b)) if not isinstance(b, (int, np.integer)) else int(b)
        norm.append((min(i, j), max(i, j), float(d) if isinstance(d, (int, float)) else d))
    topo = Topology(labels, tuple(sorted(norm)), float(alpha), source)
    return validate(topo) if check else topo


def load_ilec(alpha: float = DEFAULT_ALPHA) -> Topology:
    """The 17-node Manhattan ILEC network."""
    edges = []
    rows = [line.split() for line in _ILEC_ROWS.strip().splitlines()]
    for i, row in enumerate(rows):
        for j in range(i + 1, len(_ILEC_LABELS)):
            cell = row[1 + j]
            if cell != "-":
                edges.append((i, j, float(cell)))
    return make_topology(tuple(_ILEC_LABELS), edges, alpha)


def load_topology(path) -> Topology:
    """Read and validate a topology JSON file."""
    try:
        data = json.loads(Path(path).read_text())
        labels = data["labels"]
        edges = [tuple(e) for e in data["edges"]]
        if any(len(e) != 3 for e in edges):
            raise ValueError("edges must be [i, j, km] triples")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise TopologyError("parse", f"{path}: {exc}") from exc
    return make_topology(labels, edges, data.get("alpha_db_per_km", DEFAULT_ALPHA), data.get("source"))


def save_topology(topology: Topology, path) -> None:
    Path(path).write_text(json.dumps(topology.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class WattsStrogatzSpec:
    n: int
    k: int
    beta: float
    edge_length_km: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.k % 2 or not 2 <= self.k < self.n:
            raise ConfigError(f"need even k with 2 <= k < n, got n={self.n}, k={self.k}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.edge_length_km > 0:
            raise ConfigError("edge length must be positive")


def _ws_edges(n: int, k: int, beta: float, rng: np.random.Generator) -> list[set]:
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= beta:
                continue
            if len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return adj


def generate_ws(spec: WattsStrogatzSpec, max_attempts: int = 200_000, alpha: float = DEFAULT_ALPHA) -> Topology:
    """Sample a Watts-Strogatz graph, resampling until it is 2-edge-connected.

    All attempts draw from one ``numpy`` generator seeded with ``spec.seed``,
    so the result is a deterministic function of ``spec``.
    """
    rng = np.random.default_rng(spec.seed)
    labels = tuple(str(i) for i in range(spec.n))
    for _ in range(max_attempts):
        adj = _ws_edges(spec.n, spec.k, spec.beta, rng)
        if min(len(a) for a in adj) < 2:
            continue
        edges = tuple(sorted((u, v, float(spec.edge_length_km)) for u in range(spec.n) for v in adj[u] if u < v))
        topo = Topology(labels, edges, alpha)
        if is_two_edge_connected(topo):
            return topo
    raise GenerationError(f"no admissible topology for {spec} after {max_attempts} attempts")


def ring_lattice_k(n: int, k_over_n: float) -> int:
    """Even neighbour count closest to ``k_over_n * n``, at least 2 and below n.

    An odd product is halfway between two even counts; it rounds up.
    """
    k = max(2, 2 * math.floor(k_over_n * n / 2 + 0.5))
    return min(k, n - 1 if (n - 1) % 2 == 0 else n - 2)
