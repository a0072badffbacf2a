import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprnet.errors import ConfigError
from eprnet.netgraph import FIBER, GEN, IN, MEM, OUT, PASS, expand, transmittance
from eprnet.topology import Topology, load_ilec, make_topology


def _two_node():
    # a single link is a bridge, so validation is skipped for this hand case
    return make_topology("SB", [("S", "B", 5.0)], check=False)


def test_two_node_hand_count():
    g = expand(_two_node(), "S", 4)
    labels = sorted(g.vertex_label(v) for v in range(g.n_vertices))
    assert labels == ["B.in[S]", "B.mem", "B.out[S]", "S.gen", "S.mem", "S.out[B]"]
    out_s = g.vid("S", OUT, "B")
    in_b = g.vid("B", IN, "S")
    path = [g.find_arc(g.gen, out_s), g.find_arc(out_s, in_b), g.find_arc(in_b, g.mem("B"))]
    assert g.path_loss(path) == pytest.approx(14.0)
    assert g.path_label(path) == "S.gen->S.out[B]->B.in[S]->B.mem"
    # nothing may enter the source node
    assert not g.out_arcs[g.vid("B", OUT, "S")]
    assert not g.has_vertex("S", IN, "B")


def test_triangle_pass_through_and_no_uturn():
    t = make_topology("SBC", [("S", "B", 5), ("B", "C", 5), ("S", "C", 5)])
    g = expand(t, "S", 4)
    a = g.find_arc(g.vid("B", IN, "S"), g.vid("B", OUT, "C"))
    assert a is not None and g.weight[a] == 8.0 and g.kind[a] == PASS
    assert g.find_arc(g.vid("B", IN, "S"), g.vid("B", OUT, "S")) is None
    assert g.find_arc(g.vid("B", IN, "C"), g.vid("B", OUT, "C")) is None
    with_uturns = expand(t, "S", 4, include_uturns=True)
    assert with_uturns.find_arc(with_uturns.vid("B", IN, "C"), with_uturns.vid("B", OUT, "C")) is not None


def test_arc_weights_by_kind():
    t = load_ilec()
    g = expand(t, "M", 8)
    for a in range(g.n_arcs):
        u, v = g.vertices[g.tail[a]], g.vertices[g.head[a]]
        w = g.weight[a]
        if g.kind[a] == FIBER:
            assert (u.role, v.role) == (OUT, IN) and v.node != g.source
            assert w == pytest.approx(0.4 * t.length(u.node, v.node))
        elif u.role == GEN:
            assert w == (16.0 if v.role == OUT else 8.0)
        elif v.role == MEM:
            assert w == 8.0
        else:
            assert (u.role, v.role, w) == (IN, OUT, 16.0)


def _expected_counts(t: Topology, s: int):
    nbrs = t.neighbors()
    d = [len(x) for x in nbrs]
    e = len(t.edges)
    vertices = 1 + t.n + 2 * e + (2 * e - d[s])
    arcs = 1 + d[s]  # gen -> mem, gen -> out[*]
    for i in range(t.n):
        if i == s:
            continue
        adjacent_to_source = s in nbrs[i]
        # in[j] -> out[k] for k != j, k != s; plus in[j] -> mem
        arcs += d[i] * (d[i] - 1) - (d[i] - 1 if adjacent_to_source else 0) + d[i]
    arcs += sum(d[i] - (1 if s in nbrs[i] else 0) for i in range(t.n))  # fiber arcs not entering s
    return vertices, arcs


def _random_admissible(n, p, seed):
    g = nx.gnp_random_graph(n, p, seed=seed)
    if not nx.is_connected(g) or nx.has_bridges(g):
        return None
    return make_topology([str(i) for i in range(n)], [(u, v, 1.0 + (u * 7 + v * 3) % 5) for u, v in g.edges])


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 6), st.floats(0.4, 1.0), st.integers(0, 10**6), st.data())
def test_counts_match_formula(n, p, seed, data):
    t = _random_admissible(n, p, seed)
    if t is None:
        return
    s = data.draw(st.integers(0, n - 1))
    g = expand(t, s, 4)
    assert (g.n_vertices, g.n_arcs) == _expected_counts(t, s)
    roles = [v.role for v in g.vertices]
    assert roles.count(GEN) == 1 and roles.count(MEM) == n
    assert all(w >= 0 for w in g.weight)


def _simple_paths(g, src, dst):
    """Every simple path as an arc list, by direct DFS over the arc table."""
    stack = [(src, [], {src})]
    while stack:
        v, arcs, seen = stack.pop()
        if v == dst:
            yield arcs
            continue
        for a in g.out_arcs[v]:
            h = int(g.head[a])
            if h not in seen:
                stack.append((h, arcs + [a], seen | {h}))


@pytest.mark.parametrize("seed", range(6))
def test_path_loss_formula(seed):
    t = _random_admissible(5, 0.7, seed) or make_topology("ABCD", [(0, 1, 2), (1, 2, 3), (2, 3, 4), (0, 3, 1)])
    g = expand(t, 0, 4)
    for node in range(1, t.n):
        for arcs in itertools.islice(_simple_paths(g, g.gen, g.mem(node)), 50):
            verts = [g.vertices[g.tail[a]] for a in arcs] + [g.vertices[g.head[arcs[-1]]]]
            hops = [(g.vertices[g.tail[a]].node, g.vertices[g.head[a]].node) for a in arcs if g.kind[a] == FIBER]
            # intermediate nodes are those entered and left again
            t_mid = sum(1 for v in verts if v.role == IN) - 1
            expected = 0.4 * sum(t.length(i, j) for i, j in hops) + 2 * 4 * (1 + t_mid) + 4
            assert g.path_loss(arcs) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_higher_wss_loss_raises_every_path(seed):
    t = _random_admissible(5, 0.8, seed) or load_ilec()
    lo, hi = expand(t, 1, 4), expand(t, 1, 5)
    assert list(lo.tail) == list(hi.tail) and list(lo.head) == list(hi.head)
    for node in range(t.n):
        for arcs in itertools.islice(_simple_paths(lo, lo.gen, lo.mem(node)), 30):
            assert hi.path_loss(arcs) > lo.path_loss(arcs)


def test_edge_list_dump(tmp_path):
    g = expand(_two_node(), "S", 4)
    text = g.edge_list()
    assert "S.gen S.out[B] 8.0 from_gen" in text
    assert "S.out[B] B.in[S] 2.0 fiber" in text
    assert len(text.splitlines()) == g.n_arcs
    path = tmp_path / "g.txt"
    g.write_edge_list(path)
    assert path.read_text() == text


def test_memory_loss_is_configurable():
    g = expand(_two_node(), "S", 4, mem_loss=0.5)
    assert g.weight[g.find_arc(g.gen, g.mem("S"))] == 4.5


@pytest.mark.parametrize("kwargs", [dict(source="Z", l_wss=4), dict(source="S", l_wss=-1), dict(source="S", l_wss=4, mem_loss=-1)])
def test_expand_errors(kwargs):
    source = kwargs.pop("source")
    l_wss = kwargs.pop("l_wss")
    with pytest.raises(ConfigError):
        expand(_two_node(), source, l_wss, **kwargs)


@pytest.mark.parametrize("db, eta", [(0, 1.0), (10, 0.1), (14, 0.0398107)])
def test_transmittance(db, eta):
    assert transmittance(db) == pytest.approx(eta, abs=1e-6)


def test_transmittance_rejects_negative_loss():
    with pytest.raises(ConfigError):
        transmittance(-1)
