import json

import pytest

from nansched import cli, fixtures
from nansched.dynamics import parse_schedule, render_schedule, render_traffic


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "traffic.txt").write_text(render_traffic(fixtures.exp1_traffic(24)))
    (tmp_path / "unit.txt").write_text("inject 2 1\ninject 3 1\ntmax 5\n")
    (tmp_path / "sched.txt").write_text(render_schedule(fixtures.table1_exp1_schedule()))
    (tmp_path / "net.txt").write_text(
        "node 1 gateway\nnode 2 source\nnode 3 source\nedge 1 2\nedge 2 3\n"
    )
    return tmp_path


def run(argv):
    return cli.main(argv)


def test_validate_ok(workdir, capsys):
    rc = run([
        "validate", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
        "--schedule", str(workdir / "sched.txt"),
        "--require-complete",
    ])
    out = capsys.readouterr().out
    assert rc == cli.EXIT_OK
    assert "delivery_time=24" in out and "transmissions=82" in out


def test_validate_json(workdir, capsys):
    rc = run([
        "validate", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
        "--schedule", str(workdir / "sched.txt"),
        "--format", "json",
    ])
    payload = json.loads(capsys.readouterr().out)
    assert rc == cli.EXIT_OK
    assert payload["delivery_time"] == 24
    assert payload["delivered_by_gateway"] == {"1": 24}


def test_validate_invalid_schedule_strict(workdir, capsys):
    (workdir / "bad.txt").write_text("slot 0: 2->1\nslot 1: 2->1\nslot 2: 2->1\n")
    rc = run([
        "validate", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--schedule", str(workdir / "bad.txt"),
    ])
    assert rc == cli.EXIT_INVALID
    assert "invalid" in capsys.readouterr().err
    rc = run([
        "validate", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--schedule", str(workdir / "bad.txt"),
        "--semantics", "operational",
    ])
    assert rc == cli.EXIT_OK


def test_parse_error_exit_code(workdir, capsys):
    (workdir / "garbled.txt").write_text("slot zero: 2->1\n")
    rc = run([
        "validate", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
        "--schedule", str(workdir / "garbled.txt"),
    ])
    assert rc == cli.EXIT_PARSE
    rc = run([
        "validate", "--network", str(workdir / "missing.txt"),
        "--traffic", str(workdir / "traffic.txt"),
        "--schedule", str(workdir / "sched.txt"),
    ])
    assert rc == cli.EXIT_PARSE


def test_solve_then_validate_pipeline(workdir, capsys):
    out = workdir / "solved.txt"
    rc = run([
        "solve", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--out", str(out),
    ])
    assert rc == cli.EXIT_OK
    assert "delivery_time=3" in capsys.readouterr().out
    sched = parse_schedule(out.read_text())
    assert len(sched) == 3
    rc = run([
        "validate", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--schedule", str(out),
        "--require-complete",
    ])
    assert rc == cli.EXIT_OK


def test_solve_infeasible_horizon(workdir, capsys):
    rc = run([
        "solve", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--tmax", "2",
    ])
    out = capsys.readouterr().out
    assert rc == cli.EXIT_INVALID
    assert "undelivered=1" in out and "status=optimal" in out


def test_solve_heuristic_mode(workdir, capsys):
    rc = run([
        "solve", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
        "--tmax", "40",
        "--mode", "heuristic",
        "--format", "json",
    ])
    payload = json.loads(capsys.readouterr().out)
    assert rc == cli.EXIT_OK
    assert payload["status"] == "feasible" and payload["undelivered"] == 0


def test_solve_gateway_override(workdir, capsys):
    lines = [
        f"inject {n} {c}" for n, c in fixtures.EXP1_INJECTIONS.items() if n != 4
    ]
    (workdir / "no4.txt").write_text("\n".join(lines) + "\ntmax 24\n")
    rc = run([
        "solve", "--network", "nan11", "--gateways", "1,4",
        "--traffic", str(workdir / "no4.txt"),
        "--format", "json",
    ])
    payload = json.loads(capsys.readouterr().out)
    assert rc == cli.EXIT_OK
    assert payload["delivery_time"] < 24


def test_export_lp_deterministic(workdir, capsys):
    argv = [
        "export-lp", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
    ]
    assert run(argv) == cli.EXIT_OK
    first = capsys.readouterr().out
    assert run(argv) == cli.EXIT_OK
    assert capsys.readouterr().out == first
    assert first.startswith("\\") or first.startswith("Minimize")
    assert "Subject To" in first and first.rstrip().endswith("End")
    out = workdir / "model.lp"
    assert run(argv + ["--out", str(out)]) == cli.EXIT_OK
    assert out.read_text() == first


def test_oracle_command(workdir, capsys):
    rc = run([
        "oracle", "--network", str(workdir / "net.txt"),
        "--traffic", str(workdir / "unit.txt"),
        "--format", "json",
    ])
    payload = json.loads(capsys.readouterr().out)
    assert rc == cli.EXIT_OK
    assert payload["min_delivery"] == 3 and payload["min_undelivered"] == 0


def test_oracle_cap_exit_code(workdir, capsys):
    rc = run([
        "oracle", "--network", "nan11",
        "--traffic", str(workdir / "traffic.txt"),
        "--state-cap", "100",
    ])
    assert rc == cli.EXIT_ORACLE_CAP
    assert "cap exceeded" in capsys.readouterr().err


def test_bench_selectors_cover_experiments():
    rows = cli.run_bench("1")
    assert all(r.match for r in rows)
    rows = cli.run_bench("2")
    assert all(r.match for r in rows)
    rows = cli.run_bench("5")
    assert all(r.match for r in rows)


def test_bench_command_exit_and_format(capsys):
    rc = cli.main(["bench", "2", "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert rc == cli.EXIT_OK
    assert payload[0]["match"] is True
    rc = cli.main(["bench", "2"])
    out = capsys.readouterr().out
    assert rc == cli.EXIT_OK and out.startswith("ok ")
