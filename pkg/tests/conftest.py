import random

import pytest

from nansched.dynamics import TrafficSpec
from nansched.topology import Network, NodeRole


def random_connected_network(rng: random.Random, n: int, n_gateways: int = 1) -> Network:
    """Random tree plus a few extra edges; roles are gateways + sources."""
    assert 1 <= n_gateways < n
    edges = set()
    for k in range(2, n + 1):
        a = rng.randint(1, k - 1)
        edges.add((min(a, k), max(a, k)))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(range(1, n + 1), 2)
        edges.add((min(a, b), max(a, b)))
    gws = set(rng.sample(range(1, n + 1), n_gateways))
    roles = {
        v: (NodeRole.GATEWAY if v in gws else NodeRole.SOURCE) for v in range(1, n + 1)
    }
    return Network(roles=roles, edges=frozenset(edges))


def random_traffic(rng: random.Random, net: Network, max_total: int, horizon: int) -> TrafficSpec:
    sources = sorted(net.sources)
    total = rng.randint(1, max_total)
    injections = {}
    for _ in range(total):
        s = rng.choice(sources)
        injections[s] = injections.get(s, 0) + 1
    return TrafficSpec(injections=injections, horizon=horizon)


@pytest.fixture
def rng():
    return random.Random(20260823)
