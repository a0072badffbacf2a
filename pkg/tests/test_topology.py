import json
from importlib import resources
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprnet.errors import ConfigError, GenerationError, TopologyError
from eprnet.topology import (
    Topology,
    WattsStrogatzSpec,
    _ws_edges,
    generate_ws,
    is_two_edge_connected,
    load_ilec,
    load_topology,
    make_topology,
    ring_lattice_k,
    save_topology,
)


@pytest.fixture(scope="module")
def ilec():
    return load_ilec()


def test_ilec_shape(ilec):
    assert ilec.labels == tuple("ABCDEFGHIJKLMNOPQ")
    assert ilec.length("A", "B") == 0.304
    assert ilec.length("B", "A") == 0.304
    assert ilec.length("P", "M") == 2.96
    assert ilec.length("P", "A") is None
    assert ilec.length("Q", "O") == 4.368
    degrees = dict(zip(ilec.labels, ilec.degrees()))
    assert degrees["P"] == 2
    assert degrees["M"] == 16
    assert min(degrees.values()) == 2 and max(degrees.values()) == 16
    # 15 fully meshed sites, plus P-M, P-Q, Q-M, Q-N, Q-O
    assert len(ilec.edges) == 15 * 14 // 2 + 5


def test_ilec_is_admissible(ilec):
    assert nx.edge_connectivity(ilec.to_networkx()) >= 2


def test_packaged_ilec_file_matches_table(ilec):
    data = json.loads(resources.files("eprnet").joinpath("data/ilec.json").read_text())
    assert tuple(data["labels"]) == ilec.labels
    assert [tuple(e) for e in data["edges"]] == list(ilec.edges)


def test_json_round_trip(ilec, tmp_path):
    path = tmp_path / "net.json"
    save_topology(ilec, path)
    assert load_topology(path) == ilec


def test_labels_and_indices_are_interchangeable():
    t = make_topology("ABC", [("A", "B", 1), ("B", "C", 2), (0, 2, 3)])
    assert t.edges == ((0, 1, 1.0), (0, 2, 3.0), (1, 2, 2.0))
    with pytest.raises(ConfigError):
        t.index("Z")
    with pytest.raises(ConfigError):
        t.index(7)


@pytest.mark.parametrize(
    "labels, edges, reason",
    [
        ("ABC", [("A", "B", 1), ("B", "C", 1), ("A", "C", -1)], "bad length"),
        ("ABC", [("A", "B", 1), ("B", "C", 1), ("A", "C", float("nan"))], "bad length"),
        ("ABC", [("A", "B", 1), ("B", "C", 1)], "min-cut<2"),
        ("ABCD", [("A", "B", 1), ("B", "C", 1), ("A", "C", 1)], "disconnected"),
        ("ABC", [("A", "A", 1), ("B", "C", 1), ("A", "C", 1)], "self-loop"),
        ("ABC", [("A", "B", 1), ("B", "A", 2), ("B", "C", 1), ("A", "C", 1)], "duplicate edge"),
    ],
)
def test_validation_errors(labels, edges, reason):
    with pytest.raises(TopologyError) as err:
        make_topology(labels, edges)
    assert err.value.reason == reason


def test_two_triangles_joined_by_a_bridge_rejected():
    edges = [("A", "B", 1), ("B", "C", 1), ("A", "C", 1), ("D", "E", 1), ("E", "F", 1), ("D", "F", 1), ("C", "D", 1)]
    with pytest.raises(TopologyError) as err:
        make_topology("ABCDEF", edges)
    assert err.value.reason == "min-cut<2"


@pytest.mark.parametrize("text", ["not json", '{"labels": ["A"]}', '{"labels": ["A", "B"], "edges": [[0, 1]]}'])
def test_parse_errors(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(TopologyError) as err:
        load_topology(path)
    assert err.value.reason == "parse"


def test_simple_network_placeholder_needs_filling():
    path = Path(__file__).resolve().parents[1] / "configs" / "simple_network.json"
    with pytest.raises(TopologyError):
        load_topology(path)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 14), st.integers(2, 7), st.integers(0, 2**31))
def test_two_edge_connectivity_matches_max_flow(n, m_extra, seed):
    g = nx.gnm_random_graph(n, min(n + m_extra, n * (n - 1) // 2), seed=seed)
    t = Topology(tuple(str(i) for i in range(n)), tuple((min(u, v), max(u, v), 1.0) for u, v in g.edges), 0.4)
    expected = nx.is_connected(g) and nx.edge_connectivity(g) >= 2
    assert is_two_edge_connected(t) == expected


def test_ws_beta_zero_is_the_ring_lattice():
    t = generate_ws(WattsStrogatzSpec(12, 4, 0.0, seed=3))
    assert len(t.edges) == 12 * 4 // 2
    expected = {(min(u, (u + j) % 12), max(u, (u + j) % 12)) for u in range(12) for j in (1, 2)}
    assert {(i, j) for i, j, _ in t.edges} == expected
    assert all(d == 5.0 for _, _, d in t.edges)


def test_ws_deterministic_for_a_seed():
    spec = WattsStrogatzSpec(20, 8, 0.5, seed=11)
    assert generate_ws(spec) == generate_ws(spec)
    assert generate_ws(spec) != generate_ws(WattsStrogatzSpec(20, 8, 0.5, seed=12))


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 30), st.data())
def test_ws_rewiring_keeps_edge_count(n, data):
    k = data.draw(st.sampled_from([k for k in range(2, n, 2)]))
    beta = data.draw(st.floats(0, 1))
    seed = data.draw(st.integers(0, 2**31))
    adj = _ws_edges(n, k, beta, np.random.default_rng(seed))
    assert sum(len(a) for a in adj) == n * k
    assert all(u not in adj[u] for u in range(n))
    assert all(u in adj[v] for u in range(n) for v in adj[u])


@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_ws_keeps_leftward_edges(beta):
    t = generate_ws(WattsStrogatzSpec(16, 6, beta, seed=5), max_attempts=10_000)
    assert min(t.degrees()) >= 3


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_ws_n10_k2_is_the_ten_cycle(beta):
    t = generate_ws(WattsStrogatzSpec(10, 2, beta, seed=0))
    g = t.to_networkx()
    assert all(d == 2 for d in t.degrees())
    assert nx.is_connected(g) and len(t.edges) == 10


def test_ws_generation_failure_names_the_spec():
    with pytest.raises(GenerationError, match="n=10"):
        generate_ws(WattsStrogatzSpec(10, 2, 0.9, seed=0), max_attempts=0)


@pytest.mark.parametrize("kwargs", [dict(n=10, k=3, beta=0.5), dict(n=10, k=10, beta=0.5), dict(n=10, k=4, beta=1.5)])
def test_ws_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        WattsStrogatzSpec(**kwargs)


@pytest.mark.parametrize(
    "n, frac, k", [(10, 0.2, 2), (10, 0.4, 4), (10, 0.8, 8), (20, 0.2, 4), (30, 0.2, 6), (40, 0.8, 32), (5, 0.1, 2), (15, 0.2, 4), (25, 0.2, 6), (10, 0.95, 8)]
)
def test_ring_lattice_k(n, frac, k):
    assert ring_lattice_k(n, frac) == k
