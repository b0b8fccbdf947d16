"""Embedded reference instances for the built-in 11-node network."""

from __future__ import annotations

from .dynamics import Activation, Schedule, TrafficSpec
from .topology import Network, builtin_nan11

# Unequal-injection experiment: initial queue sizes at nodes 2..11.
EXP1_INJECTIONS = {
    2: 1,
    3: 3,
    4: 3,
    5: 2,
    6: 3,
    7: 1,
    8: 2,
    9: 3,
    10: 3,
    11: 3,
}

# Optimal link schedule, unequal injections, no queue bound (24 slots, 82 moves).
TABLE1_EXP1 = [
    [(3, 1), (7, 2), (6, 4), (11, 10)],
    [(2, 1), (9, 3), (5, 4), (11, 10)],
    [(2, 1), (9, 3), (6, 4), (11, 10)],
    [(3, 1), (8, 2), (5, 6), (4, 7), (10, 9)],
    [(2, 1), (9, 3), (8, 10)],
    # the reference listing has {2,1} here, which would put node 2 on two links
    # and break message conservation; {3,1} is the unique single-link repair
    [(3, 1), (7, 2), (6, 4), (10, 8)],
    [(2, 1), (9, 3), (6, 5), (4, 7)],
    [(3, 1), (8, 2), (10, 11), (4, 7)],
    [(3, 1), (7, 2), (10, 9)],
    [(3, 1), (7, 2), (10, 9), (11, 8)],
    [(2, 1), (9, 3), (10, 8), (4, 7)],
    [(3, 1), (7, 2), (4, 6), (8, 10)],
    [(2, 1), (10, 9), (5, 6), (4, 7), (8, 11)],
    [(3, 1), (4, 7), (11, 8)],
    [(2, 1), (9, 3), (6, 4), (7, 8)],
    [(2, 1), (9, 3), (6, 5), (4, 7), (8, 10)],
    [(3, 1), (8, 2), (5, 4), (10, 9)],
    [(2, 1), (9, 3), (4, 7)],
    [(3, 1), (7, 2), (10, 9)],
    [(2, 1), (9, 3)],
    [(3, 1), (7, 2)],
    [(2, 1)],
    [(3, 1), (7, 2)],
    [(2, 1)],
]

# Optimal link schedule with per-node queue bound 3 (24 slots, 88 moves).
TABLE1_EXP2 = [
    [(3, 1), (8, 2), (4, 7)],
    [(2, 1), (9, 3), (4, 7)],
    [(3, 1), (7, 2), (5, 4), (10, 9)],
    [(2, 1), (9, 3), (6, 5), (4, 7), (11, 10)],
    [(3, 1), (7, 2), (4, 6), (10, 9), (8, 11)],
    [(2, 1), (9, 3), (6, 4), (11, 10)],
    [(3, 1), (6, 4), (10, 9)],
    [(2, 1), (9, 3), (5, 6), (4, 7), (10, 11)],
    [(3, 1), (7, 2), (4, 6), (11, 8), (10, 9)],
    [(3, 1), (9, 2), (5, 4), (8, 7), (11, 10)],
    [(2, 1), (9, 3), (7, 8), (11, 10)],
    [(2, 1), (9, 3), (4, 7), (8, 10)],
    [(3, 1), (7, 2), (6, 5), (10, 9)],
    [(3, 1), (7, 2), (5, 6), (10, 9)],
    [(2, 1), (9, 3), (6, 4), (7, 8)],
    [(3, 1), (8, 2), (4, 7), (10, 9)],
    [(2, 1), (9, 3), (7, 8)],
    [(3, 1), (6, 4), (8, 10)],
    [(2, 1), (9, 3), (4, 7)],
    [(3, 1), (6, 4), (7, 8)],
    [(3, 1), (8, 2), (4, 7), (10, 9)],
    [(2, 1), (9, 3), (7, 8)],
    [(3, 1), (8, 2)],
    [(2, 1)],
]

# Bid-aggregation schedule: unit injections at nodes 2..11, 10 slots.
TABLE2_BIDS = [
    [(3, 1), (7, 2), (6, 4), (10, 9)],
    [(2, 1), (9, 3), (4, 7), (11, 10)],
    [(2, 1), (9, 3), (5, 4), (8, 10)],
    [(3, 1), (7, 2), (10, 9)],
    [(3, 1), (9, 2), (4, 7)],
    [(2, 1), (7, 8), (10, 9)],
    [(2, 1), (9, 3), (8, 10), (4, 7)],
    [(3, 1), (7, 2), (10, 9)],
    [(2, 1), (9, 3)],
    [(3, 1)],
]

# Delivery times reported for a second gateway placed at nodes 2..11.
TABLE3_DELIVERY_TIMES = {
    2: 7,
    3: 9,
    4: 5,
    5: 5,
    6: 5,
    7: 5,
    8: 7,
    9: 8,
    10: 8,
    11: 8,
}

# Reported message split (to node 1, to the second gateway) per placement.
TABLE3_SPLITS = {
    2: (2, 7),
    3: (5, 4),
    4: (5, 4),
    5: (5, 4),
    6: (5, 4),
    7: (4, 5),
    8: (4, 5),
    9: (4, 5),
    10: (5, 4),
    11: (4, 5),
}


def exp1_traffic(horizon: int = 24, cap: int | None = None) -> TrafficSpec:
    caps = {n: cap for n in EXP1_INJECTIONS} if cap is not None else None
    return TrafficSpec(injections=dict(EXP1_INJECTIONS), horizon=horizon, queue_caps=caps)


def unit_traffic(net: Network, horizon: int) -> TrafficSpec:
    """One message at every source node."""
    return TrafficSpec(injections={n: 1 for n in sorted(net.sources)}, horizon=horizon)


def table1_exp1_schedule() -> Schedule:
    return Schedule([Activation(slot) for slot in TABLE1_EXP1])


def table1_exp2_schedule() -> Schedule:
    return Schedule([Activation(slot) for slot in TABLE1_EXP2])


def table2_schedule() -> Schedule:
    return Schedule([Activation(slot) for slot in TABLE2_BIDS])
