"""
CLI command implementations.

Each command reads a run config, does its work and returns a report dict;
the entry point prints it and maps exceptions to exit codes.
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import CheckFailed, ConfigError
from magnetic_lqr.core.problem import DesignProblem, build_problem
from magnetic_lqr.core.run_config import RunConfig, load_run_config
from magnetic_lqr.cli.checks import run_check_suite
from magnetic_lqr.services.dynamics.orbit import magnetic_field, orbital_period
from magnetic_lqr.services.riccati.schedule import riccati_residual
from magnetic_lqr.services.riccati.solvers import solve_schedule
from magnetic_lqr.services.simulation.closed_loop import monodromy, simulate_closed_loop
from magnetic_lqr.services.storage.csv_export import write_field_csv, write_trajectory_csv
from magnetic_lqr.services.storage.plots import plot_trajectory
from magnetic_lqr.services.storage.schedule_store import (
    check_schedule_matches,
    load_schedule,
    save_schedule,
)
from magnetic_lqr.utils.logger import log_duration

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _output_dir(config: RunConfig, out: Optional[PathLike]) -> Path:
    directory = Path(out) if out is not None else Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _write_json(report: dict, path: Path) -> Path:
    path.write_text(json.dumps(report, indent=2, default=str), encoding="utf-8")
    return path


# =============================================================================
# SOLVE
# =============================================================================

def cmd_solve(
    config_path: PathLike,
    out: Optional[PathLike] = None,
    solver: Optional[str] = None,
) -> dict:
    """
    Design the periodic gain schedule and persist it.

    Args:
        config_path: YAML run config
        out: Output directory (defaults to output.directory)
        solver: gamma | pi | eigen | recursion (defaults to solver.tag)

    Returns:
        Summary report (also written as solve_report.json)
    """
    config = load_run_config(config_path)
    directory = _output_dir(config, out)
    tag = solver or config.solver.tag

    with log_duration(logger, "solve", solver=tag) as outcome:
        problem = build_problem(config)
        pencil = problem.build_pencil()
        schedule = solve_schedule(
            tag,
            pencil,
            problem.weights,
            unit_circle_tol=config.solver.unit_circle_tol,
            workers=config.solver.workers,
            num_periods=config.solver.oracle_periods,
            convergence_tol=config.solver.convergence_tol,
        )
        residuals = riccati_residual(problem.model, problem.weights, schedule)
        mono = monodromy(problem.model, schedule)
        schedule_path = save_schedule(
            directory / settings.SCHEDULE_FILENAME, schedule, problem.config_hash
        )
        outcome["spectral_radius"] = mono.spectral_radius

    report = {
        "command": "solve",
        "solver": schedule.solver_tag.value,
        "p": schedule.p,
        "ts": schedule.ts,
        "residual_max": float(np.max(residuals)),
        "psd_margin": schedule.psd_margin(),
        "symmetry_error": schedule.symmetry_error(),
        "spectral_radius": mono.spectral_radius,
        "inversions": schedule.inversions,
        "refinement_steps": schedule.refinement_steps,
        "schedule_path": str(schedule_path),
        "config_hash": problem.config_hash,
    }
    _write_json(report, directory / "solve_report.json")
    return report


# =============================================================================
# SIMULATE
# =============================================================================

def cmd_simulate(
    config_path: PathLike,
    schedule_path: Optional[PathLike] = None,
    out: Optional[PathLike] = None,
    plots: bool = False,
) -> dict:
    """
    Simulate the closed loop under a persisted schedule and export the CSV.

    Raises:
        ScheduleMismatch: the schedule header does not describe this config
    """
    config = load_run_config(config_path)
    directory = _output_dir(config, out)
    schedule_path = Path(schedule_path) if schedule_path else directory / settings.SCHEDULE_FILENAME

    problem = build_problem(config)
    schedule, header = load_schedule(schedule_path)
    check_schedule_matches(header, problem.model, problem.config_hash)

    trajectory = simulate_closed_loop(problem.model, schedule, problem.simulation)
    csv_path = write_trajectory_csv(trajectory, directory / "trajectory.csv")

    report = {
        "command": "simulate",
        "schedule_path": str(schedule_path),
        "csv_path": str(csv_path),
        **trajectory.to_dict(),
    }
    if plots or config.output.plots:
        report["plots"] = [str(p) for p in plot_trajectory(trajectory, directory / "plots")]
    return report


def simulate_in_memory(problem: DesignProblem, solver: str = "gamma"):
    """Solve and simulate without touching the filesystem."""
    schedule = solve_schedule(solver, problem.build_pencil(), problem.weights)
    return schedule, simulate_closed_loop(problem.model, schedule, problem.simulation)


# =============================================================================
# FIELD
# =============================================================================

def cmd_field(
    config_path: PathLike,
    num_samples: int = 200,
    out: Optional[PathLike] = None,
) -> dict:
    """
    Sample the dipole field over one orbital period (both ends included).

    Raises:
        ConfigError: num_samples < 2
    """
    if num_samples < 2:
        raise ConfigError(f"--samples must be >= 2, got {num_samples}")

    config = load_run_config(config_path)
    directory = _output_dir(config, out)
    orbit = config.orbit_params()

    times = np.linspace(0.0, orbital_period(orbit), num_samples)
    field = magnetic_field(orbit, times)
    csv_path = write_field_csv(times, field, directory / "field.csv")

    return {
        "command": "field",
        "csv_path": str(csv_path),
        "num_samples": num_samples,
        "orbital_period_s": float(times[-1]),
        "max_abs_field_T": np.max(np.abs(field), axis=0).tolist(),
    }


# =============================================================================
# CHECK
# =============================================================================

def cmd_check(config_path: PathLike, out: Optional[PathLike] = None) -> dict:
    """
    Run the invariant suite and write check_report.json.

    Raises:
        CheckFailed: at least one check failed (the report is still written)
    """
    config = load_run_config(config_path)
    directory = _output_dir(config, out)

    with log_duration(logger, "check") as outcome:
        problem = build_problem(config)
        report = run_check_suite(
            problem,
            unit_circle_tol=config.solver.unit_circle_tol,
            num_periods=config.solver.oracle_periods,
            convergence_tol=config.solver.convergence_tol,
            workers=config.solver.workers,
        )
        outcome["failed"] = len(report.failures)

    result = {"command": "check", "p": problem.p, **report.to_dict()}
    _write_json(result, directory / "check_report.json")

    if not report.passed:
        raise CheckFailed(
            f"{len(report.failures)} of {len(report.results)} checks failed: "
            + ", ".join(r.name for r in report.failures),
            detail=result,
        )
    return result
