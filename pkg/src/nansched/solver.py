"""Exact branch-and-bound scheduler, admissible bounds, greedy heuristic, oracle."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from . import dynamics
from .dynamics import Activation, Schedule, TrafficSpec
from .topology import Network, NodeRole

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible-within-horizon"

MODE_EXACT = "exact"
MODE_HEURISTIC = "heuristic"


class BudgetExceeded(RuntimeError):
    pass


class OracleCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    mode: str = MODE_EXACT
    node_budget: int = 0  # max search states, 0 = unlimited
    time_budget: float = 0.0  # wall seconds, 0 = unlimited
    seed: int = 0  # heuristic tie-breaking


@dataclass
class SolveResult:
    schedule: Schedule
    delivery_time: int | None
    undelivered: int
    status: str
    lower_bound_used: int
    search_nodes: int
    transmissions: int = 0


def lower_bound(net: Network, queues: dict[int, int]) -> int:
    """Admissible delivery-time bound: max of gateway throughput and hop distance."""
    m = sum(queues.values())
    if m == 0:
        return 0
    n_d = len(net.gateways)
    bound = math.ceil(m / n_d)
    for node, q in queues.items():
        if q > 0:
            bound = max(bound, net.gateway_distances[node])
    return bound


class _Search:
    """Shared state for one exact solve: instance arrays, memo tables, budgets."""

    def __init__(self, net: Network, traffic: TrafficSpec, opts: SolveOptions):
        self.net = net
        self.traffic = traffic
        self.opts = opts
        self.nodes = sorted(net.roles)
        self.pos = {n: k for k, n in enumerate(self.nodes)}
        self.n = len(self.nodes)
        self.gw = {self.pos[g] for g in net.gateways}
        self.n_d = len(self.gw)
        self.dist = [net.gateway_distances[n] for n in self.nodes]
        self.comp = {self.pos[c] for c in traffic.compromised}
        caps = traffic.queue_caps
        self.caps = (
            None
            if caps is None
            else [caps.get(n, float("inf")) for n in self.nodes]
        )
        # candidate directed links; compromised nodes neither send nor receive
        self.links = []
        for a, b in sorted(net.edges):
            for i, j in ((a, b), (b, a)):
                pi, pj = self.pos[i], self.pos[j]
                if pi in self.gw or pi in self.comp or pj in self.comp:
                    continue
                self.links.append(
                    (pi, pj, (1 << pi) | (1 << pj), pj in self.gw, i, j)
                )
        # per-gateway feeder nodes (non-gateway neighbors), for throughput bounds
        self.feeders = []
        for g in sorted(self.gw):
            nbrs = [
                self.pos[v]
                for v in net.neighbors[self.nodes[g]]
                if self.pos[v] not in self.gw
            ]
            self.feeders.append(nbrs)
        q0 = traffic.initial_queues(net)
        self.q0 = tuple(q0[n] for n in self.nodes)
        self.fail_memo: dict[tuple, int] = {}
        self.und_memo: dict[tuple, tuple[int, bool]] = {}
        self.expanded = 0
        self.deadline = (
            time.monotonic() + opts.time_budget if opts.time_budget else None
        )

    # -- bookkeeping ---------------------------------------------------------

    def _tick(self):
        self.expanded += 1
        if self.opts.node_budget and self.expanded > self.opts.node_budget:
            raise BudgetExceeded("node budget exhausted")
        if self.deadline is not None and self.expanded % 512 == 0:
            if time.monotonic() > self.deadline:
                raise BudgetExceeded("time budget exhausted")

    # -- bounds ---------------------------------------------------------------

    def _und_lower_bound(self, q: tuple, r: int) -> int:
        """Admissible lower bound on the final total queue after r more slots."""
        m = sum(q)
        if m == 0:
            return 0
        lb = 0
        # distance/throughput profile: messages farther than k hops cannot be
        # absorbed during the first k slots
        far = sorted(
            (10**9 if i in self.comp else self.dist[i])
            for i, qi in enumerate(q)
            if qi > 0
            for _ in range(qi)
        )
        ks = sorted({0, *(min(d - 1, r) for d in far if d > 0), r})
        total = m
        for k in ks:
            beyond = sum(1 for d in far if d > k)
            # recount multiplicity: far holds one entry per message already
            lb = max(lb, beyond - (r - k) * self.n_d)
        # gateway feeder throughput: a feeder with queue qf sends at most
        # (qf + r) // 2 times in r slots (it must receive between sends)
        capacity = 0
        for nbrs in self.feeders:
            cap_g = sum((q[f] + r) // 2 for f in nbrs if f not in self.comp)
            capacity += min(r, cap_g)
        lb = max(lb, total - capacity)
        return lb

    # -- activation enumeration ----------------------------------------------

    def _candidates(self, q: tuple) -> list:
        out = []
        caps = self.caps
        for link in self.links:
            pi, pj, mask, is_del, i, j = link
            if q[pi] <= 0:
                continue
            if caps is not None and not is_del and q[pj] >= caps[pj]:
                continue
            out.append(link)
        dist = self.dist
        out.sort(
            key=lambda l: (
                dist[l[1]] >= dist[l[0]],  # gateway-ward links first
                dist[l[1]],
                -q[l[0]],
                -(q[l[0]] - (0 if l[3] else q[l[1]])),
                l[4],
                l[5],
            )
        )
        return out

    def _activations(self, cands: list, required: int):
        """Yield every node-disjoint activation, greedy-maximal first."""
        n = len(cands)
        suffix = [0] * (n + 1)
        for k in range(n - 1, -1, -1):
            suffix[k] = suffix[k + 1] + (1 if cands[k][3] else 0)

        def rec(idx, used, chosen, delivered):
            if delivered + suffix[idx] < required:
                return
            if idx == n:
                yield tuple(chosen)
                return
            link = cands[idx]
            if not used & link[2]:
                chosen.append(link)
                yield from rec(
                    idx + 1, used | link[2], chosen, delivered + (1 if link[3] else 0)
                )
                chosen.pop()
            yield from rec(idx + 1, used, chosen, delivered)

        yield from rec(0, 0, [], 0)

    def _apply(self, q: tuple, act) -> tuple:
        qq = list(q)
        for pi, pj, _mask, is_del, _i, _j in act:
            qq[pi] -= 1
            if not is_del:
                qq[pj] += 1
        return tuple(qq)

    # -- phase 1: minimum delivery time ---------------------------------------

    def can_empty(self, q: tuple, r: int):
        """Schedule (list of activations) emptying the network in <= r slots."""
        m = sum(q)
        if m == 0:
            return []
        if r <= 0:
            return None
        if self._und_lower_bound(q, r) > 0:
            return None
        if self.fail_memo.get(q, 0) >= r:
            return None
        self._tick()
        required = max(0, m - self.n_d * (r - 1))
        cands = self._candidates(q)
        for act in self._activations(cands, required):
            if not act:
                continue  # idling cannot help when the deadline is tight
            sub = self.can_empty(self._apply(q, act), r - 1)
            if sub is not None:
                return [act] + sub
        if r > self.fail_memo.get(q, 0):
            self.fail_memo[q] = r
        return None

    # -- phase 2: minimum undelivered ------------------------------------------

    def min_undelivered(self, q: tuple, r: int, alpha: int) -> int:
        """Best achievable final total queue; exact whenever the result < alpha."""
        m = sum(q)
        if m == 0:
            return 0
        if r == 0:
            return m
        lb = self._und_lower_bound(q, r)
        if lb >= alpha:
            return lb
        key = (q, r)
        hit = self.und_memo.get(key)
        if hit is not None:
            val, proven_lb, exact = hit
            if exact:
                return val
            if proven_lb >= alpha:
                return proven_lb
        self._tick()
        best = m  # idling to the horizon is always available
        cands = self._candidates(q)
        for act in self._activations(cands, 0):
            if best <= lb:
                break
            if not act:
                continue
            v = self.min_undelivered(self._apply(q, act), r - 1, min(alpha, best))
            if v < best:
                best = v
        exact = best < alpha or best == lb
        proven_lb = best if exact else max(alpha, hit[1] if hit else 0)
        self.und_memo[key] = (best, proven_lb, exact)
        return best

    def reconstruct(self, q: tuple, r: int, target: int) -> list:
        """Walk the memoized value function to extract an optimal schedule."""
        acts = []
        while r > 0 and sum(q) > target:
            cands = self._candidates(q)
            step_found = False
            for act in self._activations(cands, 0):
                if not act:
                    continue
                q2 = self._apply(q, act)
                if self.min_undelivered(q2, r - 1, target + 1) <= target:
                    acts.append(act)
                    q = q2
                    r -= 1
                    step_found = True
                    break
            if not step_found:  # pragma: no cover - value function guarantees a step
                raise RuntimeError("schedule reconstruction failed")
        return acts

    # -- greedy ---------------------------------------------------------------

    def greedy_activation(self, q: tuple, rng: random.Random | None):
        cands = self._candidates(q)
        if rng is not None:
            dist = self.dist
            cands.sort(
                key=lambda l: (
                    dist[l[1]] >= dist[l[0]],
                    dist[l[1]],
                    -q[l[0]],
                    -(q[l[0]] - (0 if l[3] else q[l[1]])),
                    rng.random(),
                )
            )
        used = 0
        chosen = []
        for link in cands:
            if not used & link[2]:
                chosen.append(link)
                used |= link[2]
        return tuple(chosen)

    def greedy_run(self, rng: random.Random | None = None):
        """Greedy schedule up to the horizon; returns (acts, final queue vector)."""
        q = self.q0
        acts = []
        frozen = sum(q[i] for i in self.comp)
        for _ in range(self.traffic.horizon):
            if sum(q) <= frozen:
                break
            act = self.greedy_activation(q, rng)
            if not act:
                break
            acts.append(act)
            q = self._apply(q, act)
        return acts, q

    def to_schedule(self, acts) -> Schedule:
        return Schedule(
            [Activation((i, j) for _pi, _pj, _m, _d, i, j in act) for act in acts]
        )


def _finish(
    search: _Search,
    acts,
    status: str,
    lb: int,
) -> SolveResult:
    """Replay the chosen schedule to certify the reported numbers."""
    sched = search.to_schedule(acts)
    trace = dynamics.run_schedule(search.net, search.traffic, sched, dynamics.STRICT)
    m = dynamics.metrics(trace)
    return SolveResult(
        schedule=sched,
        delivery_time=m["delivery_time"],
        undelivered=m["undelivered_at_end"],
        status=status,
        lower_bound_used=lb,
        search_nodes=search.expanded,
        transmissions=m["transmissions"],
    )


def solve_exact(
    net: Network, traffic: TrafficSpec, opts: SolveOptions = SolveOptions()
) -> SolveResult:
    """Prove the minimum delivery time or, failing the horizon, the minimum
    number of undelivered messages (lexicographic biobjective)."""
    problems = traffic.validate(net)
    if problems:
        raise ValueError("; ".join(problems))
    search = _Search(net, traffic, opts)
    lb = lower_bound(net, {n: search.q0[search.pos[n]] for n in search.nodes})
    if sum(search.q0) == 0:
        return _finish(search, [], OPTIMAL, 0)
    t_max = traffic.horizon
    frozen = sum(search.q0[i] for i in search.comp)
    greedy_acts, greedy_final = search.greedy_run(rng=None)
    greedy_emptied = sum(greedy_final) == 0
    try:
        if frozen == 0:
            hi = len(greedy_acts) if greedy_emptied else t_max + 1
            for t in range(lb, min(hi, t_max + 1)):
                acts = search.can_empty(search.q0, t)
                if acts is not None:
                    return _finish(search, acts, OPTIMAL, lb)
            if greedy_emptied and len(greedy_acts) <= t_max:
                return _finish(search, greedy_acts, OPTIMAL, lb)
        # horizon cannot be met: minimize what is left behind
        incumbent = sum(greedy_final)
        und_floor = search._und_lower_bound(search.q0, t_max)
        best_acts = greedy_acts
        if incumbent > und_floor:
            val = search.min_undelivered(search.q0, t_max, incumbent)
            if val < incumbent:
                best_acts = search.reconstruct(search.q0, t_max, val)
        return _finish(search, best_acts, OPTIMAL, lb)
    except BudgetExceeded:
        if greedy_acts or greedy_emptied:
            return _finish(search, greedy_acts, FEASIBLE, lb)
        return SolveResult(
            schedule=Schedule([]),
            delivery_time=None,
            undelivered=sum(search.q0),
            status=INFEASIBLE,
            lower_bound_used=lb,
            search_nodes=search.expanded,
        )


def solve_heuristic(
    net: Network, traffic: TrafficSpec, opts: SolveOptions = SolveOptions()
) -> SolveResult:
    """Greedy gateway-ward scheduling; always valid, never claims optimality."""
    problems = traffic.validate(net)
    if problems:
        raise ValueError("; ".join(problems))
    search = _Search(net, traffic, opts)
    lb = lower_bound(net, {n: search.q0[search.pos[n]] for n in search.nodes})
    acts, _final = search.greedy_run(rng=random.Random(opts.seed))
    return _finish(search, acts, FEASIBLE, lb)


def solve(
    net: Network, traffic: TrafficSpec, opts: SolveOptions = SolveOptions()
) -> SolveResult:
    if opts.mode == MODE_HEURISTIC:
        return solve_heuristic(net, traffic, opts)
    return solve_exact(net, traffic, opts)


@dataclass
class OracleResult:
    min_delivery: int | None
    min_undelivered: int
    states: int


def oracle(
    net: Network,
    traffic: TrafficSpec,
    horizon: int | None = None,
    state_cap: int = 10**7,
) -> OracleResult:
    """Exhaustive breadth-first search of the full queue-state graph.

    Independent of the branch-and-bound path: plain subset enumeration over
    candidate links with an explicit disjointness check.
    """
    problems = traffic.validate(net)
    if problems:
        raise ValueError("; ".join(problems))
    if horizon is None:
        horizon = traffic.horizon
    nodes = sorted(net.roles)
    pos = {n: k for k, n in enumerate(nodes)}
    gw = {pos[g] for g in net.gateways}
    comp = {pos[c] for c in traffic.compromised}
    caps = traffic.queue_caps
    cap_arr = None if caps is None else [caps.get(n, None) for n in nodes]
    directed = []
    for a, b in sorted(net.edges):
        for i, j in ((a, b), (b, a)):
            pi, pj = pos[i], pos[j]
            if pi in gw or pi in comp or pj in comp:
                continue
            directed.append((pi, pj))
    init = traffic.initial_queues(net)
    q0 = tuple(init[n] for n in nodes)

    def successors(q):
        cands = [
            (i, j)
            for i, j in directed
            if q[i] > 0
            and (
                j in gw
                or cap_arr is None
                or cap_arr[j] is None
                or q[j] < cap_arr[j]
            )
        ]
        results = []

        def rec(idx, used, qq):
            if idx == len(cands):
                results.append(tuple(qq))
                return
            i, j = cands[idx]
            rec(idx + 1, used, qq)
            if i not in used and j not in used:
                qq2 = list(qq)
                qq2[i] -= 1
                if j not in gw:
                    qq2[j] += 1
                rec(idx + 1, used | {i, j}, qq2)

        rec(0, frozenset(), list(q))
        return results

    total0 = sum(q0)
    if total0 == 0:
        return OracleResult(min_delivery=0, min_undelivered=0, states=1)
    visited = {q0}
    frontier = [q0]
    best_und = total0
    for t in range(1, horizon + 1):
        nxt = set()
        for q in frontier:
            for q2 in successors(q):
                if q2 not in visited:
                    visited.add(q2)
                    nxt.add(q2)
                    if len(visited) > state_cap:
                        raise OracleCapExceeded(
                            f"state cap {state_cap} exceeded at slot {t}"
                        )
        for q2 in nxt:
            best_und = min(best_und, sum(q2))
            if best_und == 0:
                return OracleResult(
                    min_delivery=t, min_undelivered=0, states=len(visited)
                )
        frontier = list(nxt)
        if not frontier:
            break
    return OracleResult(
        min_delivery=None, min_undelivered=best_und, states=len(visited)
    )
