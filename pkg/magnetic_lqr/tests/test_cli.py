"""
Command line tests.

Exercises the four subcommands through main(), checking exit codes, the
written artifacts and the printed reports.
"""

import csv
import json
import math

import numpy as np
import pytest

from magnetic_lqr.cli.commands import cmd_field, simulate_in_memory
from magnetic_lqr.core.problem import build_problem
from magnetic_lqr.core.run_config import parse_run_config
from magnetic_lqr.main import build_parser, main
from magnetic_lqr.services.storage.schedule_store import load_schedule

pytestmark = [pytest.mark.cli, pytest.mark.integration]


def _read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def leo_config_file(write_config, leo_config_data):
    return write_config(leo_config_data)


# =============================================================================
# ARGUMENT PARSING
# =============================================================================

def test_parser_subcommands():
    """Test each subcommand parses its own options."""
    parser = build_parser()

    args = parser.parse_args(["solve", "--config", "c.yaml", "--solver", "pi"])
    assert (args.command, args.solver) == ("solve", "pi")

    args = parser.parse_args(["field", "--config", "c.yaml", "--samples", "50"])
    assert args.samples == 50

    args = parser.parse_args(["simulate", "--config", "c.yaml", "--plots"])
    assert args.plots is True
    assert args.schedule is None


def test_missing_config_is_usage_error(capsys):
    """Test a missing --config exits with 1."""
    assert main(["solve"]) == 1


def test_unknown_command_is_usage_error():
    """Test an unknown subcommand exits with 1."""
    assert main(["optimize", "--config", "c.yaml"]) == 1


def test_unreadable_config_exits_one(tmp_path):
    """Test a config path that does not exist exits with 1."""
    assert main(["solve", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 1


def test_invalid_config_exits_one(write_config, leo_config_data, tmp_path, capsys):
    """Test a config failing validation exits with 1 and names the field."""
    leo_config_data["orbit"]["altitude_m"] = -5.0
    path = write_config(leo_config_data)

    assert main(["solve", "--config", str(path), "--out", str(tmp_path)]) == 1
    assert "orbit.altitude_m" in capsys.readouterr().err


# =============================================================================
# SOLVE
# =============================================================================

def test_solve_leo_config(leo_config_file, tmp_path, capsys):
    """Test solve reports p = 100, ts, residual, radius and writes the schedule."""
    out = tmp_path / "out"

    assert main(["solve", "--config", str(leo_config_file), "--out", str(out)]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["p"] == 100
    assert abs(report["ts"] - 58.6352) <= 0.01
    assert report["residual_max"] <= 1e-6
    assert report["spectral_radius"] < 1.0
    assert report["inversions"] == 1
    assert report["refinement_steps"] >= 0
    assert report["solver"] == "gamma-schur"
    assert (out / "schedule.npz").exists()
    assert json.loads((out / "solve_report.json").read_text())["config_hash"] == report["config_hash"]


@pytest.mark.slow
def test_solve_pi_matches_gamma(leo_config_file, tmp_path, capsys):
    """Test the pi and gamma schedule files agree to 1e-6; 100 vs 1 inversions."""
    main(["solve", "--config", str(leo_config_file), "--out", str(tmp_path / "g")])
    main(["solve", "--config", str(leo_config_file), "--out", str(tmp_path / "p"), "--solver", "pi"])

    gamma, gamma_header = load_schedule(tmp_path / "g" / "schedule.npz")
    pi, pi_header = load_schedule(tmp_path / "p" / "schedule.npz")

    assert gamma_header.inversions == 1
    assert pi_header.inversions == 100
    for Pg, Pp in zip(gamma.P_list, pi.P_list):
        assert np.linalg.norm(Pg - Pp) <= 1e-6 * np.linalg.norm(Pg)


def test_solve_equal_moments_exits_two(write_config, leo_config_data, tmp_path, capsys):
    """Test J11 = J22 exits with 2 and a SingularA diagnostic."""
    leo_config_data["spacecraft"]["inertia"] = [150.0, 150.0, 100.0]
    path = write_config(leo_config_data)

    assert main(["solve", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert '"error": "SingularA"' in capsys.readouterr().err


def test_solve_two_samples_exits_two(write_config, leo_config_data, tmp_path, capsys):
    """Test p = 2 puts ts past the singular sample time and exits with 2."""
    leo_config_data["discretization"]["samples_per_orbit"] = 2
    path = write_config(leo_config_data)

    assert main(["solve", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert '"error": "SingularAk"' in capsys.readouterr().err


# =============================================================================
# SIMULATE
# =============================================================================

def test_simulate_after_solve(leo_config_file, tmp_path, capsys):
    """Test simulate writes the CSV and reports a decaying state."""
    out = tmp_path / "out"
    main(["solve", "--config", str(leo_config_file), "--out", str(out)])
    capsys.readouterr()

    assert main(["simulate", "--config", str(leo_config_file), "--out", str(out)]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["decay_factor"] < 0.03
    rows = _read_rows(out / "trajectory.csv")
    assert len(rows) == 1001
    for column in ("q1", "q2", "q3"):
        assert abs(float(rows[-1][column])) < abs(float(rows[0][column]))


def test_simulate_matches_in_memory_run(leo_config_file, leo_config_data, tmp_path, capsys):
    """Test the persisted schedule reproduces the in-memory trajectory bit for bit."""
    out = tmp_path / "out"
    main(["solve", "--config", str(leo_config_file), "--out", str(out)])
    main(["simulate", "--config", str(leo_config_file), "--out", str(out)])

    _, trajectory = simulate_in_memory(build_problem(parse_run_config(leo_config_data)))
    rows = _read_rows(out / "trajectory.csv")
    states = np.array([[float(row[c]) for c in ("q1", "q2", "q3", "w1", "w2", "w3")] for row in rows])

    assert np.array_equal(states, trajectory.states)


def test_simulate_zero_initial_state(write_config, leo_config_data, tmp_path, capsys):
    """Test x0 = 0 produces all-zero state and moment cells."""
    leo_config_data["simulation"]["x0"] = [0.0] * 6
    leo_config_data["simulation"]["num_orbits"] = 1
    path = write_config(leo_config_data)
    main(["solve", "--config", str(path), "--out", str(tmp_path)])

    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 0

    for row in _read_rows(tmp_path / "trajectory.csv"):
        values = [row[c] for c in row if c != "t_s" and row[c] != ""]
        assert all(float(v) == 0.0 for v in values)


def test_simulate_with_foreign_schedule_exits_one(write_config, leo_config_data, tmp_path, capsys):
    """Test a schedule solved for other weights is rejected."""
    path = write_config(leo_config_data, "a.yaml")
    main(["solve", "--config", str(path), "--out", str(tmp_path)])

    leo_config_data["weights"]["R"] = [4.0e-3, 4.0e-3, 4.0e-3]
    other = write_config(leo_config_data, "b.yaml")

    assert main(["simulate", "--config", str(other), "--out", str(tmp_path)]) == 1
    assert '"error": "ScheduleMismatch"' in capsys.readouterr().err


def test_simulate_without_schedule_exits_one(leo_config_file, tmp_path):
    """Test simulate before solve exits with 1."""
    assert main(["simulate", "--config", str(leo_config_file), "--out", str(tmp_path)]) == 1


@pytest.mark.slow
def test_simulate_plots(leo_config_file, tmp_path, capsys):
    """Test --plots renders the state and moment figures."""
    main(["solve", "--config", str(leo_config_file), "--out", str(tmp_path)])

    assert main(["simulate", "--config", str(leo_config_file), "--out", str(tmp_path), "--plots"]) == 0
    assert len(list((tmp_path / "plots").glob("*.png"))) == 7


# =============================================================================
# FIELD
# =============================================================================

def test_field_leo_config(leo_config_file, leo_config_data, tmp_path):
    """Test b2 is constant, b3(0) = 0 and max b3 is twice max b1."""
    report = cmd_field(leo_config_file, num_samples=200, out=tmp_path)
    rows = _read_rows(tmp_path / "field.csv")

    config = parse_run_config(leo_config_data)
    orbit = config.orbit_params()
    b1 = np.array([float(r["b1_T"]) for r in rows])
    b2 = np.array([float(r["b2_T"]) for r in rows])
    b3 = np.array([float(r["b3_T"]) for r in rows])

    assert report["num_samples"] == len(rows) == 200
    np.testing.assert_allclose(b2, -orbit.field_scale * math.cos(orbit.magnetic_inclination_rad), rtol=1e-15)
    assert b3[0] == 0.0
    assert np.max(b3) == pytest.approx(2.0 * np.max(b1), rel=1e-3)
    assert float(rows[-1]["t_s"]) == pytest.approx(report["orbital_period_s"])


def test_field_samples_option(leo_config_file, tmp_path, capsys):
    """Test --samples sets the number of rows."""
    assert main(["field", "--config", str(leo_config_file), "--out", str(tmp_path), "--samples", "7"]) == 0
    assert len(_read_rows(tmp_path / "field.csv")) == 7


def test_field_rejects_single_sample(leo_config_file, tmp_path):
    """Test fewer than two samples exits with 1."""
    assert main(["field", "--config", str(leo_config_file), "--out", str(tmp_path), "--samples", "1"]) == 1


# =============================================================================
# CHECK
# =============================================================================

@pytest.mark.slow
def test_check_leo_config_passes(leo_config_file, tmp_path, capsys):
    """Test every invariant check passes on the 657 km example."""
    assert main(["check", "--config", str(leo_config_file), "--out", str(tmp_path)]) == 0

    report = json.loads((tmp_path / "check_report.json").read_text())
    assert report["status"] == "pass"
    names = {c["name"] for c in report["checks"]}
    assert {"gamma_symplectic", "pi_agreement", "oracle_agreement", "monodromy_spectral_radius"} <= names


@pytest.mark.slow
def test_check_single_sample_passes(write_config, leo_config_data, tmp_path, capsys):
    """Test p = 1 reduces to the time-invariant case and passes."""
    leo_config_data["spacecraft"]["inertia"] = [200.0, 300.0, 150.0]
    leo_config_data["discretization"]["samples_per_orbit"] = 1
    leo_config_data["weights"] = {"Q": [1.0] * 6, "R": [1.0e-6] * 3}
    leo_config_data["solver"]["oracle_periods"] = 20000
    path = write_config(leo_config_data)

    assert main(["check", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "check_report.json").read_text())["p"] == 1


def test_check_two_samples_exits_two(write_config, leo_config_data, tmp_path):
    """Test p = 2 fails before the suite with a numerical error."""
    leo_config_data["discretization"]["samples_per_orbit"] = 2
    path = write_config(leo_config_data)

    assert main(["check", "--config", str(path), "--out", str(tmp_path)]) == 2


@pytest.mark.slow
def test_check_failure_exits_three(write_config, leo_config_data, tmp_path, capsys):
    """Test a failing check exits with 3 and still writes the report."""
    leo_config_data["solver"]["oracle_periods"] = 1
    path = write_config(leo_config_data)

    assert main(["check", "--config", str(path), "--out", str(tmp_path)]) == 3

    report = json.loads((tmp_path / "check_report.json").read_text())
    assert report["status"] == "fail"
    failed = [c["name"] for c in report["checks"] if c["status"] == "fail"]
    assert "oracle_agreement" in failed
