"""
Design problem assembly.

Turns a validated RunConfig into the model objects the solvers consume:
orbit, continuous and discrete plant, weights and simulation settings.
"""

import logging
from dataclasses import dataclass

from magnetic_lqr.core.run_config import RunConfig
from magnetic_lqr.services.dynamics.orbit import OrbitParams
from magnetic_lqr.services.dynamics.spacecraft import (
    ContinuousModel,
    InertiaMatrix,
    PeriodicDiscreteModel,
    build_continuous,
    discretize,
)
from magnetic_lqr.services.riccati.weights import WeightConfig
from magnetic_lqr.services.simulation.closed_loop import SimulationConfig
from magnetic_lqr.services.symplectic.pencil import SymplecticPencil, build_pencil

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """Everything one run needs, built from its config."""

    config: RunConfig
    orbit: OrbitParams
    inertia: InertiaMatrix
    continuous: ContinuousModel
    model: PeriodicDiscreteModel
    weights: WeightConfig
    simulation: SimulationConfig

    @property
    def p(self) -> int:
        return self.model.p

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def build_pencil(self) -> SymplecticPencil:
        """Fresh pencil (with its own inversion counter) for this problem."""
        return build_pencil(self.model, self.weights.Q, self.weights.R)


def build_problem(config: RunConfig) -> DesignProblem:
    """
    Assemble the design problem described by a run config.

    Args:
        config: Validated run config

    Returns:
        DesignProblem

    Raises:
        ConfigError: invalid inertia, weights or simulation settings
        NumericalError: singular A or Ak, indefinite weights
    """
    p = config.discretization.samples_per_orbit

    orbit = config.orbit_params()
    inertia = InertiaMatrix(config.inertia_matrix())
    continuous = build_continuous(inertia, orbit)
    model = discretize(continuous, orbit, p)

    weights = WeightConfig(
        Q=config.state_weight(),
        R=config.input_weight(),
        QN=config.terminal_weight(),
        assume_detectable=config.weights.assume_detectable,
    )
    simulation = SimulationConfig(
        x0=config.simulation.x0,
        num_steps=config.simulation.num_orbits * p,
        moment_limit=config.simulation.moment_limit,
    )

    logger.info(
        "Design problem assembled",
        extra={"p": p, "ts": model.ts, "omega0": continuous.omega0},
    )
    return DesignProblem(
        config=config,
        orbit=orbit,
        inertia=inertia,
        continuous=continuous,
        model=model,
        weights=weights,
        simulation=simulation,
    )
