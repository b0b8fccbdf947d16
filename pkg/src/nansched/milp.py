"""Time-expanded MILP of the scheduling problem, with LP-format export."""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import Activation, Schedule, TrafficSpec, run_schedule, STRICT
from .dynamics import validate_activation
from .topology import Network, NodeRole


class ModelError(ValueError):
    pass


def c_name(i: int, j: int, t: int) -> str:
    return f"C_{i}_{j}_t{t}"


def q_name(i: int, t: int) -> str:
    return f"Q_{i}_t{t}"


def d_name(t: int) -> str:
    return f"d_t{t}"


@dataclass(frozen=True)
class Row:
    """One linear constraint: sum(coeffs) <sense> rhs, tagged with its origin."""

    name: str
    coeffs: dict[str, int]
    sense: str  # '<=' or '='
    rhs: int
    tag: str


@dataclass
class MilpModel:
    net: Network
    traffic: TrafficSpec
    horizon: int
    big_m: int
    objective: dict[str, int]
    rows: list[Row]
    binaries: list[str]
    generals: list[str]

    def directed_edges(self):
        for a, b in sorted(self.net.edges):
            yield a, b
            yield b, a


def build_model(net: Network, traffic: TrafficSpec) -> MilpModel:
    """Construct the full time-expanded model over slots 0..horizon."""
    problems = traffic.validate(net)
    if problems:
        raise ModelError("; ".join(problems))
    t_max = traffic.horizon
    if t_max < 1:
        raise ModelError(f"horizon must be >= 1, got {t_max}")
    big_m = max(1, traffic.total_messages())
    nodes = sorted(net.roles)
    edges = sorted(net.edges)
    directed = [(a, b) for a, b in edges] + [(b, a) for a, b in edges]
    directed.sort()

    binaries = [c_name(i, j, t) for t in range(t_max) for i, j in directed]
    binaries += [d_name(t) for t in range(1, t_max + 1)]
    generals = [q_name(i, t) for i in nodes for t in range(t_max + 1)]

    in_links: dict[int, list[tuple[int, int]]] = {n: [] for n in nodes}
    out_links: dict[int, list[tuple[int, int]]] = {n: [] for n in nodes}
    for i, j in directed:
        out_links[i].append((i, j))
        in_links[j].append((i, j))

    rows: list[Row] = []

    # (3.1) gateway queues pinned to zero at every slot
    for g in sorted(net.gateways):
        for t in range(t_max + 1):
            rows.append(Row(f"c3_1_n{g}_t{t}", {q_name(g, t): 1}, "=", 0, "3.1"))
    # (3.2) source queues start at their injection counts
    for s in sorted(net.sources):
        rows.append(
            Row(f"c3_2_n{s}_t0", {q_name(s, 0): 1}, "=", traffic.injections.get(s, 0), "3.2")
        )
    # (3.3) relay queues start empty
    for r in sorted(net.relays):
        rows.append(Row(f"c3_3_n{r}_t0", {q_name(r, 0): 1}, "=", 0, "3.3"))
    # (3.6) queue evolution at every non-gateway node (gateways absorb, 3.1)
    for i in nodes:
        if net.roles[i] is NodeRole.GATEWAY:
            continue
        for t in range(1, t_max + 1):
            coeffs = {q_name(i, t): 1, q_name(i, t - 1): -1}
            for k, _ in in_links[i]:
                coeffs[c_name(k, i, t - 1)] = -1
            for _, j in out_links[i]:
                coeffs[c_name(i, j, t - 1)] = 1
            rows.append(Row(f"c3_6_n{i}_t{t}", coeffs, "=", 0, "3.6"))
    # (3.7) at most one active link per node
    for i in nodes:
        for t in range(t_max):
            coeffs: dict[str, int] = {}
            for k, _ in in_links[i]:
                coeffs[c_name(k, i, t)] = 1
            for _, j in out_links[i]:
                coeffs[c_name(i, j, t)] = 1
            rows.append(Row(f"c3_7_n{i}_t{t}", coeffs, "<=", 1, "3.7"))
    # (3.8) half duplex per edge (implied by 3.7, kept for catalog fidelity)
    for a, b in edges:
        for t in range(t_max):
            rows.append(
                Row(
                    f"c3_8_e{a}_{b}_t{t}",
                    {c_name(a, b, t): 1, c_name(b, a, t): 1},
                    "<=",
                    1,
                    "3.8",
                )
            )
    # (3.9) optional queue caps
    if traffic.queue_caps is not None:
        for i in sorted(traffic.queue_caps):
            cap = traffic.queue_caps[i]
            for t in range(t_max + 1):
                rows.append(Row(f"c3_9_n{i}_t{t}", {q_name(i, t): 1}, "<=", cap, "3.9"))
    # (3.12) emptiness indicator via big-M
    for t in range(1, t_max + 1):
        coeffs = {q_name(i, t): 1 for i in nodes}
        coeffs[d_name(t)] = big_m
        rows.append(Row(f"c3_12_t{t}", coeffs, "<=", big_m, "3.12"))
    # (3.16) compromised nodes pinned at their (flooded) queue level
    for i in sorted(traffic.compromised):
        pin = traffic.injections.get(i, 0)
        for t in range(1, t_max + 1):
            rows.append(Row(f"c3_16_n{i}_t{t}", {q_name(i, t): 1}, "=", pin, "3.16"))

    objective = {d_name(t): -1 for t in range(1, t_max + 1)}
    for i in nodes:
        objective[q_name(i, t_max)] = objective.get(q_name(i, t_max), 0) + 1

    return MilpModel(
        net=net,
        traffic=traffic,
        horizon=t_max,
        big_m=big_m,
        objective=objective,
        rows=rows,
        binaries=binaries,
        generals=generals,
    )


def model_stats(model: MilpModel) -> dict:
    by_kind = {"C": 0, "Q": 0, "delta": 0}
    for name in model.binaries:
        by_kind["C" if name.startswith("C_") else "delta"] += 1
    by_kind["Q"] = len(model.generals)
    by_tag: dict[str, int] = {}
    for row in model.rows:
        by_tag[row.tag] = by_tag.get(row.tag, 0) + 1
    return {"vars_by_kind": by_kind, "constraints_by_tag": by_tag}


def _lp_expr(coeffs: dict[str, int]) -> str:
    parts = []
    for name, coef in coeffs.items():
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        term = name if mag == 1 else f"{mag} {name}"
        parts.append(f"{sign} {term}")
    if not parts:
        return "0"
    return " ".join(parts)


def export_lp(model: MilpModel) -> str:
    """Render the model as LP-format text with byte-stable ordering."""
    out = ["Minimize", f" obj: {_lp_expr(model.objective)}", "Subject To"]
    for row in model.rows:
        out.append(f" {row.name}: {_lp_expr(row.coeffs)} {row.sense} {row.rhs}")
    out.append("Bounds")
    for name in model.generals:
        out.append(f" {name} >= 0")
    out.append("General")
    for name in model.generals:
        out.append(f" {name}")
    out.append("Binary")
    for name in model.binaries:
        out.append(f" {name}")
    out.append("End")
    return "\n".join(out) + "\n"


def parse_solution(text: str) -> dict[str, float]:
    """Whitespace-separated `name value` lines."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ModelError(f"line {lineno}: expected 'name value'")
        try:
            out[parts[0]] = float(parts[1])
        except ValueError:
            raise ModelError(f"line {lineno}: bad value {parts[1]!r}") from None
    return out


def solution_to_schedule(model: MilpModel, assignment: dict) -> Schedule:
    """Extract the per-slot activations from a variable assignment."""
    slots = []
    for t in range(model.horizon):
        links = []
        for i, j in model.directed_edges():
            name = c_name(i, j, t)
            if name not in assignment:
                raise ModelError(f"assignment is missing variable {name}")
            value = assignment[name]
            if abs(value - round(value)) > 1e-6 or round(value) not in (0, 1):
                raise ModelError(f"variable {name} has non-binary value {value}")
            if round(value) == 1:
                links.append((i, j))
        act = Activation(links)
        bad = validate_activation(model.net, act)
        if bad:
            raise ModelError(f"slot {t}: " + "; ".join(bad))
        slots.append(act)
    return Schedule(slots)


def schedule_to_assignment(model: MilpModel, sched: Schedule) -> dict[str, int]:
    """Replay a schedule under strict semantics and fill in every model variable."""
    if len(sched) > model.horizon:
        raise ModelError("schedule longer than the model horizon")
    padded = Schedule(list(sched) + [()] * (model.horizon - len(sched)))
    trace = run_schedule(model.net, model.traffic, padded, STRICT)
    assignment: dict[str, int] = {}
    for t in range(model.horizon):
        active = set(padded[t])
        for i, j in model.directed_edges():
            assignment[c_name(i, j, t)] = 1 if (i, j) in active else 0
    for t, col in enumerate(trace.columns):
        for i, v in col.items():
            assignment[q_name(i, t)] = v
    for t in range(1, model.horizon + 1):
        assignment[d_name(t)] = 1 if sum(trace.columns[t].values()) == 0 else 0
    return assignment


def check_assignment(model: MilpModel, assignment: dict, tol: float = 1e-6) -> list[str]:
    """Names of all constraint rows the assignment violates."""
    out = []
    for row in model.rows:
        lhs = 0.0
        for name, coef in row.coeffs.items():
            lhs += coef * assignment.get(name, 0)
        if row.sense == "=" and abs(lhs - row.rhs) > tol:
            out.append(f"{row.name}: {lhs} != {row.rhs}")
        elif row.sense == "<=" and lhs > row.rhs + tol:
            out.append(f"{row.name}: {lhs} > {row.rhs}")
    return out


def objective_value(model: MilpModel, assignment: dict) -> float:
    return sum(coef * assignment.get(name, 0) for name, coef in model.objective.items())
