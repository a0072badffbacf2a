"""Directed loss graph of a source-in-the-middle network.

Every network node is split into role vertices: ``out[j]`` ports routing
photons toward neighbour ``j``, ``in[j]`` ports receiving from ``j``, a quantum
memory ``mem`` and, at the source only, the pair generator ``gen``.  Arc
weights are losses in dB, so path losses add.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .topology import Topology

GEN, MEM, OUT, IN = "gen", "mem", "out", "in"

# arc kinds
FIBER, PASS, TO_MEM, FROM_GEN = "fiber", "pass", "to_mem", "from_gen"


@dataclass(frozen=True)
class VertexRole:
    node: int
    role: str
    peer: int = -1

    def label(self, labels) -> str:
        if self.role in (GEN, MEM):
            return f"{labels[self.node]}.{self.role}"
        return f"{labels[self.node]}.{self.role}[{labels[self.peer]}]"


@dataclass
class ExpandedGraph:
    topology: Topology
    source: int
    l_wss: float
    mem_loss: float = 0.0
    include_uturns: bool = False
    vertices: list = field(default_factory=list)
    tail: np.ndarray = None
    head: np.ndarray = None
    weight: np.ndarray = None
    kind: list = field(default_factory=list)

    def __post_init__(self):
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self.out_arcs = [[] for _ in self.vertices]
        for a, t in enumerate(self.tail):
            self.out_arcs[t].append(a)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_arcs(self) -> int:
        return len(self.tail)

    def vid(self, node, role: str, peer=None) -> int:
        node = self.topology.index(node)
        peer = -1 if peer is None else self.topology.index(peer)
        return self._index[VertexRole(node, role, peer)]

    def has_vertex(self, node, role: str, peer=None) -> bool:
        node = self.topology.index(node)
        peer = -1 if peer is None else self.topology.index(peer)
        return VertexRole(node, role, peer) in self._index

    @property
    def gen(self) -> int:
        return self._index[VertexRole(self.source, GEN)]

    def mem(self, node) -> int:
        return self.vid(node, MEM)

    def find_arc(self, u: int, v: int) -> int | None:
        for a in self.out_arcs[u]:
            if self.head[a] == v:
                return a
        return None

    def vertex_label(self, v: int) -> str:
        return self.vertices[v].label(self.topology.labels)

    def path_loss(self, arcs) -> float:
        return float(sum(self.weight[a] for a in arcs))

    def path_label(self, arcs) -> str:
        if not arcs:
            return ""
        names = [self.vertex_label(self.tail[arcs[0]])]
        names += [self.vertex_label(self.head[a]) for a in arcs]
        return "->".join(names)

    def edge_list(self) -> str:
        """Text dump, one ``tail head weight_db kind`` line per arc."""
        lines = [
            f"{self.vertex_label(t)} {self.vertex_label(h)} {w!r} {k}"
            for t, h, w, k in zip(self.tail, self.head, self.weight.tolist(), self.kind)
        ]
        return "\n".join(lines) + "\n"

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.edge_list())


def expand(
    topology: Topology,
    source,
    l_wss: float,
    *,
    mem_loss: float = 0.0,
    include_uturns: bool = False,
) -> ExpandedGraph:
    """Build the directed role-vertex graph with dB arc weights.

    Fiber arcs carry ``alpha * length``; a pass-through ``in[j] -> out[k]``
    crosses two WSSs (``2 * l_wss``), a drop into memory crosses one
    (``l_wss + mem_loss``).  Nothing enters the source node.  U-turn arcs
    ``in[j] -> out[j]`` are left out unless ``include_uturns`` is set.
    """
    s = topology.index(source)
    if not l_wss >= 0 or not mem_loss >= 0:
        raise ConfigError(f"losses must be non-negative (l_wss={l_wss!r}, mem_loss={mem_loss!r})")
    nbrs = topology.neighbors()
    alpha = topology.alpha
    lengths = {(i, j): d for i, j, d in topology.edges}

    vertices: list[VertexRole] = []
    for i in range(topology.n):
        if i == s:
            vertices.append(VertexRole(i, GEN))
        vertices.append(VertexRole(i, MEM))
        for j in nbrs[i]:
            vertices.append(VertexRole(i, OUT, j))
            if i != s:
                vertices.append(VertexRole(i, IN, j))
    index = {(v.node, v.role, v.peer): k for k, v in enumerate(vertices)}

    tail, head, weight, kind = [], [], [], []

    def arc(u: tuple, v: tuple, w: float, k: str) -> None:
        tail.append(index[u])
        head.append(index[v])
        weight.append(w)
        kind.append(k)

    for i in range(topology.n):
        if i == s:
            arc((i, GEN, -1), (i, MEM, -1), l_wss + mem_loss, FROM_GEN)
            for j in nbrs[i]:
                arc((i, GEN, -1), (i, OUT, j), 2 * l_wss, FROM_GEN)
        else:
            for j in nbrs[i]:
                for k in nbrs[i]:
                    if k == s or (k == j and not include_uturns):
                        continue
                    arc((i, IN, j), (i, OUT, k), 2 * l_wss, PASS)
                arc((i, IN, j), (i, MEM, -1), l_wss + mem_loss, TO_MEM)
        for j in nbrs[i]:
            if j != s:
                arc((i, OUT, j), (j, IN, i), alpha * lengths[min(i, j), max(i, j)], FIBER)

    return ExpandedGraph(
        topology,
        s,
        float(l_wss),
        float(mem_loss),
        include_uturns,
        vertices,
        np.array(tail, dtype=np.int64),
        np.array(head, dtype=np.int64),
        np.array(weight, dtype=float),
        kind,
    )


def transmittance(loss_db):
    """Power transmittance ``10**(-loss/10)`` of a loss in dB."""
    arr = np.asarray(loss_db, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ConfigError(f"loss must be non-negative, got {loss_db!r}")
    out = 10.0 ** (-arr / 10.0)
    return float(out) if np.ndim(loss_db) == 0 else out
