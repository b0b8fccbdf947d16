import random

import pytest

from conftest import random_connected_network
from nansched.topology import (
    NAN11_EDGES,
    Network,
    NetworkError,
    NodeRole,
    builtin_nan11,
    gateway_distance,
    parse_network,
    render_network,
    validate_network,
)


def test_parse_smallest_valid_network():
    net = parse_network("node 1 gateway; node 2 source; edge 1 2".replace(";", "\n"))
    assert net.node_count == 2
    assert net.edges == frozenset({(1, 2)})
    assert net.roles[1] is NodeRole.GATEWAY


def test_parse_disconnected_rejected():
    with pytest.raises(NetworkError, match="disconnected"):
        parse_network("node 1 gateway\nnode 2 source\n")


def test_parse_errors():
    with pytest.raises(NetworkError, match="line 1"):
        parse_network("node x gateway\n")
    with pytest.raises(NetworkError, match="duplicate node id"):
        parse_network("node 1 gateway\nnode 1 source\n")
    with pytest.raises(NetworkError, match="unknown node"):
        parse_network("node 1 gateway\nnode 2 source\nedge 1 2\nedge 2 3\n")
    with pytest.raises(NetworkError, match="self-loop"):
        parse_network("node 1 gateway\nnode 2 source\nedge 2 2\n")
    with pytest.raises(NetworkError, match="unknown role"):
        parse_network("node 1 hub\n")


def test_parse_comments_and_order_insensitive():
    text = "# comment\nedge 2 1\nnode 2 source # trailing\nnode 1 gateway\n"
    net = parse_network(text)
    assert net.edges == frozenset({(1, 2)})


def test_builtin_nan11_shape():
    net = builtin_nan11()
    assert net.node_count == 11
    assert len(net.edges) == 15
    assert net.gateways == frozenset({1})
    assert net.sources == frozenset(range(2, 12))
    # node 1 touches only nodes 2 and 3
    assert net.neighbors[1] == (2, 3)


def test_builtin_nan11_contains_all_reference_links():
    from nansched import fixtures

    net = builtin_nan11()
    used = set()
    for table in (fixtures.TABLE1_EXP1, fixtures.TABLE1_EXP2, fixtures.TABLE2_BIDS):
        for slot in table:
            for a, b in slot:
                used.add((min(a, b), max(a, b)))
    assert used <= net.edges
    assert used == NAN11_EDGES  # the edge set is exactly the links the reference schedules use


def test_gateway_distance_examples():
    net = builtin_nan11()
    assert gateway_distance(net, 1) == 0
    assert gateway_distance(net, 5) == 4  # 5-4-7-2-1
    assert gateway_distance(net, 9) == 2  # 9-3-1
    with pytest.raises(NetworkError):
        gateway_distance(net, 99)


def test_validate_network_violations():
    assert validate_network(builtin_nan11()) == []
    roles = {1: NodeRole.SOURCE, 2: NodeRole.SOURCE}
    bad = object.__new__(Network)
    object.__setattr__(bad, "roles", roles)
    object.__setattr__(bad, "edges", frozenset({(1, 2)}))
    assert any("no gateway" in v for v in validate_network(bad))
    object.__setattr__(bad, "edges", frozenset({(1, 1)}))
    assert any("self-loop" in v for v in validate_network(bad))


def test_roundtrip_random_networks():
    rng = random.Random(7)
    for _ in range(50):
        net = random_connected_network(rng, rng.randint(2, 9), 1)
        assert parse_network(render_network(net)) == net


def test_gateway_distance_lipschitz_on_edges():
    rng = random.Random(11)
    for _ in range(30):
        net = random_connected_network(rng, rng.randint(3, 9), rng.randint(1, 2))
        d = net.gateway_distances
        for g in net.gateways:
            assert d[g] == 0
        for n in net.roles:
            assert (d[n] == 0) == (n in net.gateways)
        for a, b in net.edges:
            assert abs(d[a] - d[b]) <= 1


def test_with_gateways_override():
    net = builtin_nan11().with_gateways([1, 4])
    assert net.gateways == frozenset({1, 4})
    assert net.sources == frozenset({2, 3, 5, 6, 7, 8, 9, 10, 11})
