"""
Pytest configuration and shared fixtures for all tests.

This file provides common test fixtures including:
- Scalar plant (A = B = Q = R = 1) with its closed-form solution
- Seeded random well-conditioned periodic plants
- The 657 km / 100-sample design problem, its pencil and
  gamma-schur schedule (session scoped)
- A YAML config writer on tmp_path
"""

import copy
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np
import pytest
import yaml

from magnetic_lqr.core.problem import DesignProblem, build_problem
from magnetic_lqr.core.run_config import parse_run_config
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.schedule import GainSchedule
from magnetic_lqr.services.riccati.solvers import solve_periodic_gamma
from magnetic_lqr.services.riccati.weights import WeightConfig
from magnetic_lqr.services.symplectic.pencil import SymplecticPencil

LEO_CONFIG: Dict = {
    "spacecraft": {"inertia": [250.0, 150.0, 100.0]},
    "orbit": {
        "altitude_m": 657000.0,
        "magnetic_inclination_deg": 57.0,
        "earth_radius_m": 6371000.0,
    },
    "discretization": {"samples_per_orbit": 100},
    "weights": {
        "Q": [1.5e-9, 1.5e-9, 1.5e-9, 1.0e-3, 1.0e-3, 1.0e-3],
        "R": [2.0e-3, 2.0e-3, 2.0e-3],
    },
    "simulation": {"x0": [0.01, 0.01, 0.01, 1e-5, 1e-5, 1e-5], "num_orbits": 10},
    "solver": {"tag": "gamma", "oracle_periods": 60, "convergence_tol": 1e-9},
}


# =============================================================================
# SYNTHETIC PLANTS
# =============================================================================

@pytest.fixture
def scalar_model() -> PeriodicDiscreteModel:
    """x_{k+1} = x_k + m_k, period one."""
    return PeriodicDiscreteModel.from_matrices([[1.0]], [[[1.0]]], ts=1.0)


@pytest.fixture
def scalar_weights() -> WeightConfig:
    """Q = R = 1."""
    return WeightConfig(Q=[[1.0]], R=[[1.0]])


def make_random_instance(seed: int, p: int, n: int = 2, m: int = 2) -> Tuple[PeriodicDiscreteModel, WeightConfig]:
    """
    Seeded periodic plant with a well-conditioned Ak and positive definite
    weights, so every solver applies.
    """
    rng = np.random.default_rng(seed)
    while True:
        Ak = np.eye(n) + 0.4 * rng.standard_normal((n, n))
        if np.linalg.cond(Ak) < 20.0:
            break
    Bk_list = [0.8 * rng.standard_normal((n, m)) for _ in range(p)]
    L = rng.standard_normal((n, n))
    Q = np.eye(n) + 0.1 * L @ L.T
    R = np.eye(m) * (0.5 + rng.random())
    pm = PeriodicDiscreteModel.from_matrices(Ak, Bk_list, ts=1.0)
    return pm, WeightConfig(Q=Q, R=R)


@pytest.fixture
def random_instance() -> Callable[..., Tuple[PeriodicDiscreteModel, WeightConfig]]:
    """Factory for seeded random periodic instances."""
    return make_random_instance


# =============================================================================
# 657 KM DESIGN EXAMPLE
# =============================================================================

@pytest.fixture
def leo_config_data() -> Dict:
    """Mutable copy of the 657 km example config."""
    return copy.deepcopy(LEO_CONFIG)


@pytest.fixture(scope="session")
def leo_problem() -> DesignProblem:
    """The 657 km, 57 degree, p = 100 design problem."""
    return build_problem(parse_run_config(copy.deepcopy(LEO_CONFIG)))


@pytest.fixture(scope="session")
def leo_pencil(leo_problem: DesignProblem) -> SymplecticPencil:
    """Pencil of the 657 km example."""
    return leo_problem.build_pencil()


@pytest.fixture(scope="session")
def leo_gamma_schedule(leo_problem: DesignProblem, leo_pencil: SymplecticPencil) -> GainSchedule:
    """Gamma-schur schedule of the 657 km example."""
    return solve_periodic_gamma(leo_pencil, leo_problem.weights)


# =============================================================================
# CONFIG FILES
# =============================================================================

@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[Dict, str], Path]:
    """Write a config mapping to a YAML file under tmp_path."""

    def _write(data: Dict, name: str = "config.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        return path

    return _write
