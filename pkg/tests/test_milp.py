import pytest

from nansched import fixtures, milp
from nansched.dynamics import Activation, Schedule, TrafficSpec, metrics, run_schedule
from nansched.milp import ModelError
from nansched.topology import builtin_nan11, parse_network


@pytest.fixture(scope="module")
def nan11():
    return builtin_nan11()


@pytest.fixture(scope="module")
def two_node():
    return parse_network("node 1 gateway\nnode 2 source\nedge 1 2\n")


def test_exp1_model_counts(nan11):
    model = milp.build_model(nan11, fixtures.exp1_traffic(24))
    stats = milp.model_stats(model)
    assert stats["vars_by_kind"] == {"C": 2 * 15 * 24, "Q": 11 * 25, "delta": 24}
    assert model.big_m == 24
    assert stats["constraints_by_tag"]["3.7"] == 11 * 24
    assert stats["constraints_by_tag"]["3.8"] == 15 * 24
    assert stats["constraints_by_tag"]["3.12"] == 24
    assert "3.9" not in stats["constraints_by_tag"]


def test_two_node_model(two_node):
    model = milp.build_model(two_node, TrafficSpec(injections={2: 1}, horizon=1))
    stats = milp.model_stats(model)
    assert stats["vars_by_kind"] == {"C": 2, "Q": 4, "delta": 1}
    assert stats["constraints_by_tag"]["3.8"] == 1
    lp = milp.export_lp(model)
    binary_section = lp.split("Binary\n", 1)[1].split("End")[0].split()
    assert sorted(binary_section) == ["C_1_2_t0", "C_2_1_t0", "d_t1"]


def test_injection_on_relay_rejected():
    net = parse_network(
        "node 1 gateway\nnode 2 relay\nnode 3 source\nedge 1 2\nedge 2 3\n"
    )
    with pytest.raises(ModelError, match="non-source"):
        milp.build_model(net, TrafficSpec(injections={2: 1, 3: 1}, horizon=3))


def test_horizon_zero_rejected(two_node):
    with pytest.raises(ModelError):
        milp.build_model(two_node, TrafficSpec(injections={2: 1}, horizon=0))


def test_export_lp_deterministic_and_counts(nan11):
    traffic = fixtures.exp1_traffic(24)
    a = milp.export_lp(milp.build_model(nan11, traffic))
    b = milp.export_lp(milp.build_model(nan11, traffic))
    assert a == b
    binaries = a.split("Binary\n", 1)[1].split("End")[0].split()
    assert sum(1 for n in binaries if n.startswith("C_")) == 720


def test_queue_cap_rows(nan11):
    model = milp.build_model(nan11, fixtures.exp1_traffic(24, cap=3))
    stats = milp.model_stats(model)
    assert stats["constraints_by_tag"]["3.9"] == 10 * 25


def test_solution_to_schedule_all_zero(two_node):
    model = milp.build_model(two_node, TrafficSpec(injections={2: 1}, horizon=2))
    assignment = {milp.c_name(i, j, t) for t in range(2) for i, j in model.directed_edges()}
    sched = milp.solution_to_schedule(model, {n: 0 for n in assignment})
    assert len(sched) == 2 and all(len(act) == 0 for act in sched)


def test_solution_to_schedule_errors(two_node):
    model = milp.build_model(two_node, TrafficSpec(injections={2: 1}, horizon=1))
    with pytest.raises(ModelError, match="missing"):
        milp.solution_to_schedule(model, {})
    with pytest.raises(ModelError, match="non-binary"):
        milp.solution_to_schedule(model, {"C_1_2_t0": 0.5, "C_2_1_t0": 0})
    bad = {"C_1_2_t0": 1, "C_2_1_t0": 1}
    with pytest.raises(ModelError, match="slot 0"):
        milp.solution_to_schedule(model, bad)


def test_table1_assignment_roundtrip(nan11):
    traffic = fixtures.exp1_traffic(24)
    model = milp.build_model(nan11, traffic)
    assignment = milp.schedule_to_assignment(model, fixtures.table1_exp1_schedule())
    assert milp.check_assignment(model, assignment) == []
    assert milp.objective_value(model, assignment) == -1  # delivered exactly at T_max
    sched = milp.solution_to_schedule(model, assignment)
    m = metrics(run_schedule(nan11, traffic, sched))
    assert m["delivery_time"] == 24 and m["transmissions"] == 82


def test_assignment_objective_tracks_idle_tail(nan11):
    # padding the horizon rewards every trailing all-empty slot
    traffic = fixtures.unit_traffic(nan11, 12)
    model = milp.build_model(nan11, traffic)
    assignment = milp.schedule_to_assignment(model, fixtures.table2_schedule())
    assert milp.check_assignment(model, assignment) == []
    assert milp.objective_value(model, assignment) == -(12 - 10 + 1)


def test_check_assignment_flags_violations(two_node):
    model = milp.build_model(two_node, TrafficSpec(injections={2: 1}, horizon=1))
    assignment = milp.schedule_to_assignment(model, Schedule([Activation([(2, 1)])]))
    assert milp.check_assignment(model, assignment) == []
    assignment["Q_2_t1"] = 5  # break flow balance
    assert any("c3_6" in v for v in milp.check_assignment(model, assignment))


def test_parse_solution():
    sol = milp.parse_solution("C_1_2_t0 1\nQ_1_t0 0\n# comment\nd_t1 1\n")
    assert sol == {"C_1_2_t0": 1.0, "Q_1_t0": 0.0, "d_t1": 1.0}
    with pytest.raises(ModelError):
        milp.parse_solution("C_1_2_t0\n")


def test_compromised_pinning_rows(nan11):
    traffic = TrafficSpec(
        injections={n: 1 for n in range(2, 12)},
        horizon=5,
        compromised=frozenset({6}),
    )
    model = milp.build_model(nan11, traffic)
    stats = milp.model_stats(model)
    assert stats["constraints_by_tag"]["3.16"] == 5
