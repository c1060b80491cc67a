"""
Run config and settings tests.

Tests for YAML parsing, field-path error messages, matrix expansion, the
config hash and the design-problem assembly.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from magnetic_lqr.core.config import Settings
from magnetic_lqr.core.exceptions import ConfigError, DetectabilityNotAsserted, SingularA
from magnetic_lqr.core.problem import build_problem
from magnetic_lqr.core.run_config import (
    dump_run_config,
    load_run_config,
    matrix_from_spec,
    parse_run_config,
)


# =============================================================================
# PARSING
# =============================================================================

def test_parse_leo_config(leo_config_data):
    """Test the 657 km example parses with radians converted once."""
    config = parse_run_config(leo_config_data)

    assert config.discretization.samples_per_orbit == 100
    assert config.magnetic_inclination_rad == pytest.approx(math.radians(57.0), rel=1e-15)
    assert config.orbit_params().magnetic_inclination_rad == config.magnetic_inclination_rad
    np.testing.assert_array_equal(config.inertia_matrix(), np.diag([250.0, 150.0, 100.0]))


def test_parse_defaults(leo_config_data):
    """Test optional sections fall back to their defaults."""
    del leo_config_data["simulation"]
    del leo_config_data["solver"]

    config = parse_run_config(leo_config_data)

    assert config.simulation.num_orbits == 10
    assert config.simulation.x0 == [0.01, 0.01, 0.01, 1e-5, 1e-5, 1e-5]
    assert config.solver.tag == "gamma"
    assert config.terminal_weight() is None


def test_full_matrix_weights(leo_config_data):
    """Test Q may be given as a full matrix."""
    leo_config_data["weights"]["Q"] = np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 2.0]).tolist()

    config = parse_run_config(leo_config_data)

    np.testing.assert_array_equal(config.state_weight(), np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 2.0]))


def test_missing_field_reports_path(leo_config_data):
    """Test a missing field is named by its path."""
    del leo_config_data["orbit"]["altitude_m"]

    with pytest.raises(ConfigError) as exc_info:
        parse_run_config(leo_config_data)

    assert "orbit.altitude_m" in exc_info.value.message
    assert "orbit.altitude_m" in exc_info.value.detail["fields"]


def test_invalid_values_report_every_path(leo_config_data):
    """Test several invalid fields are all reported."""
    leo_config_data["discretization"]["samples_per_orbit"] = 0
    leo_config_data["weights"]["R"] = [1.0, 2.0]

    with pytest.raises(ConfigError) as exc_info:
        parse_run_config(leo_config_data)

    fields = exc_info.value.detail["fields"]
    assert "discretization.samples_per_orbit" in fields
    assert "weights.R" in fields


def test_unknown_key_rejected(leo_config_data):
    """Test unknown keys are errors rather than silently ignored."""
    leo_config_data["orbit"]["eccentricity"] = 0.01

    with pytest.raises(ConfigError):
        parse_run_config(leo_config_data)


def test_unknown_solver_rejected(leo_config_data):
    """Test solver.tag outside the four solvers raises ConfigError."""
    leo_config_data["solver"]["tag"] = "newton"

    with pytest.raises(ConfigError) as exc_info:
        parse_run_config(leo_config_data)
    assert "solver.tag" in exc_info.value.detail["fields"]


def test_non_mapping_rejected():
    """Test a YAML list is not a config."""
    with pytest.raises(ConfigError):
        parse_run_config(["spacecraft"])


def test_matrix_from_spec_shapes():
    """Test diagonal and full forms expand and others are rejected."""
    np.testing.assert_array_equal(matrix_from_spec([1.0, 2.0, 3.0], 3), np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(matrix_from_spec(np.eye(3).tolist(), 3), np.eye(3))
    with pytest.raises(ValueError):
        matrix_from_spec([1.0, 2.0], 3)


# =============================================================================
# FILES AND ROUND TRIPS
# =============================================================================

def test_load_run_config_from_yaml(write_config, leo_config_data):
    """Test a YAML file loads into the same config as the mapping."""
    path = write_config(leo_config_data)
    assert load_run_config(path) == parse_run_config(leo_config_data)


def test_load_missing_file(tmp_path):
    """Test a missing config file raises ConfigError."""
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.yaml")


def test_load_malformed_yaml(tmp_path):
    """Test malformed YAML raises ConfigError."""
    path = tmp_path / "bad.yaml"
    path.write_text("spacecraft: [1, 2\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        load_run_config(path)


def test_config_round_trip(tmp_path, leo_config_data):
    """Test parse, dump and parse again yields an identical config."""
    config = parse_run_config(leo_config_data)
    path = tmp_path / "dumped.yaml"

    dump_run_config(config, path)

    assert load_run_config(path) == config
    assert load_run_config(path).config_hash() == config.config_hash()


def test_config_hash_ignores_solver_and_output(leo_config_data):
    """Test only the plant and weights enter the hash."""
    base = parse_run_config(leo_config_data).config_hash()

    leo_config_data["solver"]["tag"] = "pi"
    leo_config_data["simulation"]["num_orbits"] = 3
    assert parse_run_config(leo_config_data).config_hash() == base

    leo_config_data["discretization"]["samples_per_orbit"] = 120
    assert parse_run_config(leo_config_data).config_hash() != base


# =============================================================================
# PROBLEM ASSEMBLY
# =============================================================================

def test_build_problem_leo(leo_problem):
    """Test the assembled problem has p = 100 and a ten-orbit horizon."""
    assert leo_problem.p == 100
    assert leo_problem.model.n == 6
    assert leo_problem.model.m == 3
    assert leo_problem.simulation.num_steps == 1000
    assert abs(leo_problem.model.ts - 58.6352) <= 0.01


def test_build_problem_equal_moments(leo_config_data):
    """Test J11 = J22 fails with SingularA."""
    leo_config_data["spacecraft"]["inertia"] = [150.0, 150.0, 100.0]

    with pytest.raises(SingularA):
        build_problem(parse_run_config(leo_config_data))


def test_build_problem_semidefinite_q(leo_config_data):
    """Test a zero entry in Q needs weights.assume_detectable."""
    leo_config_data["weights"]["Q"] = [0.0, 1.5e-9, 1.5e-9, 1e-3, 1e-3, 1e-3]

    with pytest.raises(DetectabilityNotAsserted):
        build_problem(parse_run_config(leo_config_data))


# =============================================================================
# SETTINGS
# =============================================================================

def test_settings_defaults():
    """Test process settings reproduce the documented defaults."""
    settings = Settings()

    assert settings.UNIT_CIRCLE_TOL == 1e-7
    assert settings.ORACLE_PERIODS == 60
    assert settings.ORACLE_CONVERGENCE_TOL == 1e-9
    assert settings.RICCATI_REFINEMENT_STEPS == 3
    assert settings.oracle_config == {"num_periods": 60, "convergence_tol": 1e-9}


def test_settings_from_environment(monkeypatch):
    """Test environment variables override the defaults."""
    monkeypatch.setenv("UNIT_CIRCLE_TOL", "1e-6")
    monkeypatch.setenv("LOG_LEVEL", "debug")

    settings = Settings()

    assert settings.UNIT_CIRCLE_TOL == 1e-6
    assert settings.LOG_LEVEL == "DEBUG"


def test_settings_reject_bad_values(monkeypatch):
    """Test invalid settings fail validation."""
    monkeypatch.setenv("ORACLE_PERIODS", "0")

    with pytest.raises(ValueError):
        Settings()


def test_settings_reject_negative_refinement_steps(monkeypatch):
    """Test a negative Newton step count fails validation."""
    monkeypatch.setenv("RICCATI_REFINEMENT_STEPS", "-1")

    with pytest.raises(ValueError):
        Settings()


def test_shipped_example_config_matches_fixture(leo_config_data):
    """Test configs/leo_657km.yaml describes the same problem as the fixture."""
    path = Path(__file__).resolve().parents[2] / "configs" / "leo_657km.yaml"

    config = load_run_config(path)

    assert config.config_hash() == parse_run_config(leo_config_data).config_hash()
