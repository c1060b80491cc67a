"""
Closed-Loop Simulation

Propagates x_{k+1} = Ak x_k + B_{k mod p} m_k under m_k = -K_{k mod p} x_k
on the same discrete plant the schedule was designed for, and reports the
period monodromy used as the stability certificate.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from magnetic_lqr.core.exceptions import ConfigError, DimensionMismatch
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.schedule import GainSchedule, closed_loop_matrix
from magnetic_lqr.services.riccati.weights import WeightConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimulationConfig:
  """
  Initial state, horizon and optional dipole saturation (A*m^2).
  """
  x0: np.ndarray
  num_steps: int
  moment_limit: Optional[float] = None

  def __post_init__(self) -> None:
    x0 = np.array(self.x0, dtype=float, copy=True).reshape(-1)
    x0.setflags(write=False)
    object.__setattr__(self, "x0", x0)
    if int(self.num_steps) < 1:
      raise ConfigError(f"num_steps must be >= 1, got {self.num_steps}")
    object.__setattr__(self, "num_steps", int(self.num_steps))
    if self.moment_limit is not None and not self.moment_limit > 0:
      raise ConfigError(f"moment_limit must be > 0, got {self.moment_limit}")


@dataclass(frozen=True, eq=False)
class Trajectory:
  """
  States at times k*ts (num_steps + 1 rows) and the moments applied
  between them (num_steps rows).
  """
  times: np.ndarray
  states: np.ndarray
  moments: np.ndarray

  @property
  def num_steps(self) -> int:
    return self.moments.shape[0]

  @property
  def initial_norm(self) -> float:
    return float(np.linalg.norm(self.states[0]))

  @property
  def final_norm(self) -> float:
    return float(np.linalg.norm(self.states[-1]))

  @property
  def decay_factor(self) -> float:
    """||x_N|| / ||x_0||, zero for a zero initial state."""
    if self.initial_norm == 0:
      return 0.0
    return self.final_norm / self.initial_norm

  def to_dict(self) -> dict:
    """Summary for reports."""
    return {
      "num_steps": self.num_steps,
      "duration_s": float(self.times[-1]),
      "initial_norm": self.initial_norm,
      "final_norm": self.final_norm,
      "decay_factor": self.decay_factor,
      "max_abs_moment": float(np.max(np.abs(self.moments))) if self.moments.size else 0.0,
    }


@dataclass(frozen=True, eq=False)
class MonodromyResult:
  """One-period closed-loop transition matrix and its spectrum."""
  matrix: np.ndarray
  multipliers: np.ndarray

  @property
  def spectral_radius(self) -> float:
    return float(np.max(np.abs(self.multipliers)))

  @property
  def is_stable(self) -> bool:
    return self.spectral_radius < 1.0

  def to_dict(self) -> dict:
    return {
      "spectral_radius": self.spectral_radius,
      "multiplier_magnitudes": sorted(np.abs(self.multipliers).tolist(), reverse=True),
    }


def simulate_closed_loop(
  pm: PeriodicDiscreteModel, schedule: GainSchedule, cfg: SimulationConfig
) -> Trajectory:
  """
  Run the periodic feedback loop for cfg.num_steps samples.

  Saturation, when configured, clamps each moment component to
  +-moment_limit after the gain is applied.

  Raises:
    DimensionMismatch: schedule, plant and x0 disagree in p, ts or dimensions
  """
  schedule.check_compatible(pm)
  if cfg.x0.shape != (pm.n,):
    raise DimensionMismatch(f"x0 must have {pm.n} entries, got {cfg.x0.shape[0]}")

  N = cfg.num_steps
  states = np.empty((N + 1, pm.n))
  moments = np.empty((N, pm.m))
  states[0] = cfg.x0

  for k in range(N):
    m_k = -schedule.K(k) @ states[k]
    if cfg.moment_limit is not None:
      m_k = np.clip(m_k, -cfg.moment_limit, cfg.moment_limit)
    moments[k] = m_k
    states[k + 1] = pm.Ak @ states[k] + pm.Bk(k) @ m_k

  trajectory = Trajectory(times=np.arange(N + 1) * pm.ts, states=states, moments=moments)
  logger.info("Closed-loop simulation done", extra=trajectory.to_dict())
  return trajectory


def monodromy(pm: PeriodicDiscreteModel, schedule: GainSchedule) -> MonodromyResult:
  """
  Phi = (A - B_{p-1} K_{p-1}) ... (A - B_0 K_0) and its eigenvalues.

  Raises:
    DimensionMismatch: schedule does not fit the plant
  """
  schedule.check_compatible(pm)
  phi = np.eye(pm.n)
  for k in range(pm.p):
    phi = closed_loop_matrix(pm.Ak, pm.Bk(k), schedule.K(k)) @ phi
  return MonodromyResult(matrix=phi, multipliers=np.linalg.eigvals(phi))


def realized_cost(trajectory: Trajectory, weights: WeightConfig) -> float:
  """Sum over the horizon of x_k^T Q x_k + m_k^T R m_k."""
  x = trajectory.states[:-1]
  m = trajectory.moments
  state_cost = np.einsum("ki,ij,kj->", x, weights.Q, x)
  input_cost = np.einsum("ki,ij,kj->", m, weights.R, m)
  return float(state_cost + input_cost)


def orbit_norms(trajectory: Trajectory, p: int) -> np.ndarray:
  """||x|| at every whole-period boundary k = 0, p, 2p, ..."""
  return np.linalg.norm(trajectory.states[::p], axis=1)
