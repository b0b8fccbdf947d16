"""Slotted-time queue simulator: activation validation, stepping, schedule replay."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .topology import Network, NodeRole

STRICT = "strict"
OPERATIONAL = "operational"


class SimulationError(ValueError):
    """Raised when a replay violates the queue dynamics (strict semantics)."""


Link = tuple[int, int]  # directed (sender, receiver)


@dataclass(frozen=True)
class Activation:
    """Set of directed links transmitting in one slot."""

    links: frozenset[Link]

    def __init__(self, links=()):
        object.__setattr__(self, "links", frozenset((int(a), int(b)) for a, b in links))

    def __iter__(self):
        return iter(sorted(self.links))

    def __len__(self):
        return len(self.links)

    def __contains__(self, link):
        return tuple(link) in self.links


EMPTY_ACTIVATION = Activation()


@dataclass(frozen=True)
class Schedule:
    """Ordered per-slot activations, slot t = 0 .. len-1."""

    slots: tuple[Activation, ...]

    def __init__(self, slots=()):
        object.__setattr__(
            self,
            "slots",
            tuple(s if isinstance(s, Activation) else Activation(s) for s in slots),
        )

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __getitem__(self, t):
        return self.slots[t]


@dataclass(frozen=True)
class TrafficSpec:
    """Initial injections, optional queue caps, horizon and compromised nodes."""

    injections: dict[int, int]
    horizon: int
    queue_caps: dict[int, int] | None = None
    period: int | None = None
    compromised: frozenset[int] = frozenset()

    def validate(self, net: Network) -> list[str]:
        out = []
        for node, count in self.injections.items():
            if node not in net.roles:
                out.append(f"injection at unknown node {node}")
            elif net.roles[node] is not NodeRole.SOURCE and count > 0:
                out.append(f"injection at non-source node {node}")
            if count < 0:
                out.append(f"negative injection at node {node}")
        if self.horizon < 1:
            out.append(f"horizon must be >= 1, got {self.horizon}")
        if self.queue_caps is not None:
            for node, cap in self.queue_caps.items():
                if node not in net.roles:
                    out.append(f"queue cap at unknown node {node}")
                if cap < 0:
                    out.append(f"negative queue cap at node {node}")
                if cap < self.injections.get(node, 0):
                    out.append(f"queue cap at node {node} below its initial injection")
        for node in self.compromised:
            if node not in net.roles:
                out.append(f"compromised set names unknown node {node}")
        return out

    def total_messages(self) -> int:
        return sum(self.injections.values())

    def initial_queues(self, net: Network) -> dict[int, int]:
        return {
            n: (0 if net.roles[n] is NodeRole.GATEWAY else self.injections.get(n, 0))
            for n in net.roles
        }


@dataclass
class QueueTrace:
    """Queue matrix over slots plus per-slot movement/delivery counts.

    `columns[t]` is the queue vector after slot t-1's activation
    (column 0 holds the initial injections).
    """

    columns: list[dict[int, int]]
    moved_per_slot: list[int]
    delivered_per_slot: list[int]
    delivered_by_gateway: dict[int, int]

    @property
    def total_delivered(self) -> int:
        return sum(self.delivered_per_slot)

    @property
    def total_moved(self) -> int:
        return sum(self.moved_per_slot)


def validate_activation(net: Network, act: Activation) -> list[str]:
    """Check adjacency and the one-active-link-per-node rule."""
    out = []
    touched: dict[int, int] = {}
    for a, b in act:
        for n in (a, b):
            if n not in net.roles:
                out.append(f"link {a}->{b} references unknown node {n}")
        if a == b:
            out.append(f"self-loop link {a}->{b}")
            continue
        if a in net.roles and b in net.roles and not net.has_edge(a, b):
            out.append(f"link {a}->{b} is not an edge of the network")
        touched[a] = touched.get(a, 0) + 1
        touched[b] = touched.get(b, 0) + 1
    for n, count in sorted(touched.items()):
        if count > 1:
            out.append(f"node {n} services {count} active links (at most 1 allowed)")
    return out


def step(
    net: Network,
    queues: dict[int, int],
    act: Activation,
    semantics: str = STRICT,
    caps: dict[int, int] | None = None,
    compromised: frozenset[int] = frozenset(),
) -> tuple[dict[int, int], int, dict[int, int]]:
    """Advance the queue vector by one slot.

    Returns (new queues, number of links that carried a message,
    per-gateway delivered counts). Under strict semantics an active link with
    an empty sender is an error; under operational semantics it is a no-op.
    """
    bad = validate_activation(net, act)
    if bad:
        raise SimulationError("; ".join(bad))
    if semantics not in (STRICT, OPERATIONAL):
        raise ValueError(f"unknown semantics {semantics!r}")
    new = dict(queues)
    moved = 0
    delivered: dict[int, int] = {}
    for a, b in act:
        if a in compromised or b in compromised:
            raise SimulationError(f"link {a}->{b} touches a compromised node")
        if net.roles[a] is NodeRole.GATEWAY:
            raise SimulationError(f"gateway {a} cannot send (link {a}->{b})")
        if queues[a] <= 0:
            if semantics == STRICT:
                raise SimulationError(f"link {a}->{b} active with empty sender queue")
            continue
        new[a] -= 1
        moved += 1
        if net.roles[b] is NodeRole.GATEWAY:
            delivered[b] = delivered.get(b, 0) + 1
        else:
            new[b] += 1
    if caps:
        for n, cap in caps.items():
            if new.get(n, 0) > cap:
                raise SimulationError(
                    f"queue cap exceeded at node {n}: {new[n]} > {cap}"
                )
    return new, moved, delivered


def run_schedule(
    net: Network,
    traffic: TrafficSpec,
    sched: Schedule,
    semantics: str = STRICT,
) -> QueueTrace:
    """Replay a schedule from the traffic's initial queues."""
    problems = traffic.validate(net)
    if problems:
        raise SimulationError("; ".join(problems))
    if len(sched) > traffic.horizon:
        raise SimulationError(
            f"schedule length {len(sched)} exceeds horizon {traffic.horizon}"
        )
    queues = traffic.initial_queues(net)
    columns = [dict(queues)]
    moved_per_slot: list[int] = []
    delivered_per_slot: list[int] = []
    by_gateway: dict[int, int] = {g: 0 for g in net.gateways}
    for t, act in enumerate(sched):
        try:
            queues, moved, delivered = step(
                net,
                queues,
                act,
                semantics=semantics,
                caps=traffic.queue_caps,
                compromised=traffic.compromised,
            )
        except SimulationError as exc:
            raise SimulationError(f"slot {t}: {exc}") from None
        columns.append(dict(queues))
        moved_per_slot.append(moved)
        delivered_per_slot.append(sum(delivered.values()))
        for g, k in delivered.items():
            by_gateway[g] += k
    return QueueTrace(
        columns=columns,
        moved_per_slot=moved_per_slot,
        delivered_per_slot=delivered_per_slot,
        delivered_by_gateway=by_gateway,
    )


def metrics(trace: QueueTrace) -> dict:
    """Delivery time, transmission count, undelivered tally and max queue."""
    delivery_time = None
    for t, col in enumerate(trace.columns):
        if sum(col.values()) == 0:
            delivery_time = t
            break
    final = trace.columns[-1]
    max_queue = max(max(col.values(), default=0) for col in trace.columns)
    return {
        "delivery_time": delivery_time,
        "transmissions": trace.total_moved,
        "undelivered_at_end": sum(final.values()),
        "max_queue": max_queue,
    }


# ---------------------------------------------------------------------------
# File formats: traffic and schedule, text with JSON mirrors.


class FormatError(ValueError):
    """Raised on malformed traffic or schedule files."""


def parse_traffic(text: str, filename: str = "") -> TrafficSpec:
    if filename.endswith(".json") or text.lstrip().startswith("{"):
        return _traffic_from_json(text)
    injections: dict[int, int] = {}
    caps: dict[int, int] = {}
    cap_all: int | None = None
    horizon = None
    period = None
    compromised: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        try:
            if kind == "inject" and len(parts) == 3:
                injections[int(parts[1])] = int(parts[2])
            elif kind == "qmax" and len(parts) == 3:
                if parts[1] == "*":
                    cap_all = int(parts[2])
                else:
                    caps[int(parts[1])] = int(parts[2])
            elif kind == "tmax" and len(parts) == 2:
                horizon = int(parts[1])
            elif kind == "period" and len(parts) == 2:
                period = int(parts[1])
            elif kind == "compromised" and len(parts) == 2:
                compromised.add(int(parts[1]))
            else:
                raise FormatError(f"line {lineno}: unrecognized directive {line!r}")
        except ValueError:
            raise FormatError(f"line {lineno}: bad integer in {line!r}") from None
    if horizon is None:
        raise FormatError("traffic file is missing a 'tmax <slots>' line")
    queue_caps: dict[int, int] | None = None
    if cap_all is not None:
        queue_caps = {n: cap_all for n in injections}
        queue_caps.update(caps)
    elif caps:
        queue_caps = caps
    return TrafficSpec(
        injections=injections,
        horizon=horizon,
        queue_caps=queue_caps,
        period=period,
        compromised=frozenset(compromised),
    )


def _traffic_from_json(text: str) -> TrafficSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad JSON traffic file: {exc}") from None
    try:
        caps = data.get("queue_caps")
        return TrafficSpec(
            injections={int(k): int(v) for k, v in data["injections"].items()},
            horizon=int(data["horizon"]),
            queue_caps=(
                {int(k): int(v) for k, v in caps.items()} if caps is not None else None
            ),
            period=data.get("period"),
            compromised=frozenset(int(n) for n in data.get("compromised", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad JSON traffic file: {exc}") from None


def render_traffic(traffic: TrafficSpec, as_json: bool = False) -> str:
    if as_json:
        data = {
            "injections": {str(k): v for k, v in sorted(traffic.injections.items())},
            "horizon": traffic.horizon,
        }
        if traffic.queue_caps is not None:
            data["queue_caps"] = {
                str(k): v for k, v in sorted(traffic.queue_caps.items())
            }
        if traffic.period is not None:
            data["period"] = traffic.period
        if traffic.compromised:
            data["compromised"] = sorted(traffic.compromised)
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    lines = [f"inject {n} {c}" for n, c in sorted(traffic.injections.items())]
    if traffic.queue_caps is not None:
        lines += [f"qmax {n} {c}" for n, c in sorted(traffic.queue_caps.items())]
    lines.append(f"tmax {traffic.horizon}")
    if traffic.period is not None:
        lines.append(f"period {traffic.period}")
    lines += [f"compromised {n}" for n in sorted(traffic.compromised)]
    return "\n".join(lines) + "\n"


def parse_schedule(text: str, filename: str = "") -> Schedule:
    if filename.endswith(".json") or text.lstrip().startswith(("{", "[")):
        return _schedule_from_json(text)
    by_slot: dict[int, list[Link]] = {}
    max_slot = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.lower().startswith("slot"):
            raise FormatError(f"line {lineno}: expected 'slot <t>: ...'")
        head, _, rest = line.partition(":")
        try:
            t = int(head.split()[1])
        except (IndexError, ValueError):
            raise FormatError(f"line {lineno}: bad slot header {head!r}") from None
        if t < 0:
            raise FormatError(f"line {lineno}: negative slot index {t}")
        if t in by_slot:
            raise FormatError(f"line {lineno}: duplicate slot {t}")
        links: list[Link] = []
        rest = rest.strip()
        if rest:
            for chunk in rest.split(","):
                chunk = chunk.strip()
                a, arrow, b = chunk.partition("->")
                if not arrow:
                    raise FormatError(f"line {lineno}: bad link {chunk!r}")
                try:
                    links.append((int(a), int(b)))
                except ValueError:
                    raise FormatError(f"line {lineno}: bad link {chunk!r}") from None
        by_slot[t] = links
        max_slot = max(max_slot, t)
    slots = [Activation(by_slot.get(t, ())) for t in range(max_slot + 1)]
    return Schedule(slots)


def _schedule_from_json(text: str) -> Schedule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad JSON schedule file: {exc}") from None
    if isinstance(data, dict):
        data = data.get("slots", [])
    try:
        return Schedule(
            [Activation((int(a), int(b)) for a, b in slot) for slot in data]
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad JSON schedule file: {exc}") from None


def render_schedule(sched: Schedule, as_json: bool = False) -> str:
    if as_json:
        data = {"slots": [[list(link) for link in act] for act in sched]}
        return json.dumps(data, indent=2) + "\n"
    lines = []
    for t, act in enumerate(sched):
        if len(act) == 0:
            continue
        body = ", ".join(f"{a}->{b}" for a, b in act)
        lines.append(f"slot {t}: {body}")
    # keep total length recoverable when the last slots are empty
    if len(sched) and len(sched[len(sched) - 1]) == 0:
        lines.append(f"slot {len(sched) - 1}:")
    return "\n".join(lines) + "\n"
