"""Mesh network topology: node roles, parsing, validation and distance queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property


class NodeRole(str, Enum):
    SOURCE = "source"
    RELAY = "relay"
    GATEWAY = "gateway"


class NetworkError(ValueError):
    """Raised when a network file or network structure is invalid."""


def _norm_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Network:
    """Undirected connected graph with a role per node.

    Node ids are 1..N, matching the external file format.
    """

    roles: dict[int, NodeRole]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        violations = validate_network(self)
        if violations:
            raise NetworkError("; ".join(violations))

    @property
    def node_count(self) -> int:
        return len(self.roles)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.roles)

    @cached_property
    def gateways(self) -> frozenset[int]:
        return frozenset(n for n, r in self.roles.items() if r is NodeRole.GATEWAY)

    @cached_property
    def sources(self) -> frozenset[int]:
        return frozenset(n for n, r in self.roles.items() if r is NodeRole.SOURCE)

    @cached_property
    def relays(self) -> frozenset[int]:
        return frozenset(n for n, r in self.roles.items() if r is NodeRole.RELAY)

    @cached_property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {n: [] for n in self.roles}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {n: tuple(sorted(v)) for n, v in adj.items()}

    def has_edge(self, a: int, b: int) -> bool:
        return _norm_edge(a, b) in self.edges

    @cached_property
    def gateway_distances(self) -> dict[int, int]:
        """Hop count from every node to its nearest gateway (multi-source BFS)."""
        dist = {g: 0 for g in self.gateways}
        frontier = deque(self.gateways)
        while frontier:
            u = frontier.popleft()
            for v in self.neighbors[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    frontier.append(v)
        return dist

    def with_gateways(self, gateway_ids) -> "Network":
        """Same topology with the given nodes as gateways and all others as sources."""
        gw = set(gateway_ids)
        unknown = gw - set(self.roles)
        if unknown:
            raise NetworkError(f"unknown gateway node ids: {sorted(unknown)}")
        roles = {
            n: (NodeRole.GATEWAY if n in gw else NodeRole.SOURCE) for n in self.roles
        }
        return Network(roles=roles, edges=self.edges)


def validate_network(net: Network) -> list[str]:
    """Return a list of invariant violations; empty when the network is valid."""
    out: list[str] = []
    nodes = set(net.roles)
    if not nodes:
        return ["network has no nodes"]
    for n in nodes:
        if n < 1:
            out.append(f"node id {n} is not a positive integer")
    for a, b in net.edges:
        if a == b:
            out.append(f"self-loop at node {a}")
        if a not in nodes:
            out.append(f"edge {a}-{b} references unknown node {a}")
        if b not in nodes:
            out.append(f"edge {a}-{b} references unknown node {b}")
    if not any(r is NodeRole.GATEWAY for r in net.roles.values()):
        out.append("no gateway node")
    if not any(r is NodeRole.SOURCE for r in net.roles.values()):
        out.append("no source node")
    if out:
        return out
    # connectivity (only meaningful once edges refer to known nodes)
    if len(nodes) > 1:
        adj: dict[int, list[int]] = {n: [] for n in nodes}
        for a, b in net.edges:
            if a != b:
                adj[a].append(b)
                adj[b].append(a)
        start = next(iter(nodes))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != nodes:
            missing = sorted(nodes - seen)
            out.append(f"graph is disconnected (unreachable nodes: {missing})")
    return out


def gateway_distance(net: Network, node: int) -> int:
    """BFS hop count from `node` to the nearest gateway."""
    if node not in net.roles:
        raise NetworkError(f"unknown node id {node}")
    try:
        return net.gateway_distances[node]
    except KeyError:
        raise NetworkError(f"node {node} cannot reach any gateway") from None


def parse_network(text: str) -> Network:
    """Parse the line-oriented network file format.

    Lines are `node <id> <source|relay|gateway>` or `edge <id> <id>`;
    `#` starts a comment; order is irrelevant.
    """
    roles: dict[int, NodeRole] = {}
    edges: set[tuple[int, int]] = set()
    role_names = {r.value: r for r in NodeRole}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        if kind == "node":
            if len(parts) != 3:
                raise NetworkError(f"line {lineno}: expected 'node <id> <role>'")
            nid = _parse_id(parts[1], lineno)
            role = role_names.get(parts[2].lower())
            if role is None:
                raise NetworkError(f"line {lineno}: unknown role {parts[2]!r}")
            if nid in roles:
                raise NetworkError(f"line {lineno}: duplicate node id {nid}")
            roles[nid] = role
        elif kind == "edge":
            if len(parts) != 3:
                raise NetworkError(f"line {lineno}: expected 'edge <id> <id>'")
            a = _parse_id(parts[1], lineno)
            b = _parse_id(parts[2], lineno)
            if a == b:
                raise NetworkError(f"line {lineno}: self-loop at node {a}")
            edges.add(_norm_edge(a, b))
        else:
            raise NetworkError(f"line {lineno}: unknown directive {parts[0]!r}")
    for a, b in sorted(edges):
        for n in (a, b):
            if n not in roles:
                raise NetworkError(f"edge {a}-{b} references unknown node {n}")
    return Network(roles=roles, edges=frozenset(edges))


def _parse_id(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise NetworkError(f"line {lineno}: {token!r} is not an integer") from None
    if value < 1:
        raise NetworkError(f"line {lineno}: node id must be positive, got {value}")
    return value


def render_network(net: Network) -> str:
    """Inverse of parse_network; deterministic output."""
    lines = [f"node {n} {net.roles[n].value}" for n in sorted(net.roles)]
    lines += [f"edge {a} {b}" for a, b in sorted(net.edges)]
    return "\n".join(lines) + "\n"


#: Edge set of the canonical 11-node neighborhood network, reconstructed as
#: the union of every link appearing in the embedded reference schedules.
NAN11_EDGES = frozenset(
    {
        (1, 2),
        (1, 3),
        (2, 7),
        (2, 8),
        (2, 9),
        (3, 9),
        (4, 5),
        (4, 6),
        (4, 7),
        (5, 6),
        (7, 8),
        (8, 10),
        (8, 11),
        (9, 10),
        (10, 11),
    }
)


def builtin_nan11() -> Network:
    """The canonical 11-node network: node 1 gateway, nodes 2-11 sources."""
    roles = {n: (NodeRole.GATEWAY if n == 1 else NodeRole.SOURCE) for n in range(1, 12)}
    return Network(roles=roles, edges=NAN11_EDGES)
