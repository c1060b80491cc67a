"""
Periodic Gain Schedule

The result type shared by every solver plus the one-step Riccati map it is
checked against:

  P_k = Q + Ak^T P_{k+1} Ak
        - Ak^T P_{k+1} Bk (R + Bk^T P_{k+1} Bk)^-1 Bk^T P_{k+1} Ak

  K_k = (R + Bk^T P_{k+1} Bk)^-1 Bk^T P_{k+1} Ak,   m_k = -K_k x_k

with P_p identified with P_0.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from magnetic_lqr.core.exceptions import ConfigError, DimensionMismatch
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.weights import WeightConfig


class SolverTag(str, Enum):
  """Method that produced a schedule."""
  GAMMA = "gamma-schur"
  PI = "pi-schur"
  EIGEN = "eigen"
  RECURSION = "recursion-oracle"

  @classmethod
  def from_name(cls, name: str) -> "SolverTag":
    """Accept the short CLI names (gamma, pi, eigen, recursion) or full tags."""
    short = {
      "gamma": cls.GAMMA,
      "pi": cls.PI,
      "eigen": cls.EIGEN,
      "recursion": cls.RECURSION,
    }
    key = str(name).strip().lower()
    if key in short:
      return short[key]
    try:
      return cls(key)
    except ValueError as exc:
      raise ConfigError(
        f"unknown solver '{name}'; expected one of {sorted(short)}"
      ) from exc


# =============================================================================
# ONE-STEP MAPS
# =============================================================================

def feedback_gain(Ak: np.ndarray, Bk: np.ndarray, R: np.ndarray, P_next: np.ndarray) -> np.ndarray:
  """K = (R + Bk^T P_next Bk)^-1 Bk^T P_next Ak."""
  S = R + Bk.T @ P_next @ Bk
  return scipy.linalg.solve(S, Bk.T @ P_next @ Ak)


def riccati_step(
  Ak: np.ndarray,
  Bk: np.ndarray,
  Q: np.ndarray,
  R: np.ndarray,
  P_next: np.ndarray,
) -> np.ndarray:
  """
  One backward step of the discrete Riccati recursion, P_{k+1} -> P_k.

  The result is symmetrized.
  """
  AtP = Ak.T @ P_next
  S = R + Bk.T @ P_next @ Bk
  T = Bk.T @ P_next @ Ak
  P = Q + AtP @ Ak - T.T @ scipy.linalg.solve(S, T)
  return 0.5 * (P + P.T)


def closed_loop_matrix(Ak: np.ndarray, Bk: np.ndarray, K: np.ndarray) -> np.ndarray:
  """Ak - Bk K."""
  return Ak - Bk @ K


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
  """||a - b|| / max(||a||, ||b||); zero when both are zero."""
  scale = max(np.linalg.norm(a), np.linalg.norm(b))
  if scale == 0:
    return 0.0
  return float(np.linalg.norm(a - b) / scale)


def gains_from_solutions(
  pm: PeriodicDiscreteModel, R: np.ndarray, P_list: Sequence[np.ndarray]
) -> Tuple[np.ndarray, ...]:
  """K_k from P_{k+1} for k = 0..p-1 with wraparound P_p = P_0."""
  p = len(P_list)
  return tuple(
    feedback_gain(pm.Ak, pm.Bk(k), R, P_list[(k + 1) % p]) for k in range(p)
  )


# =============================================================================
# SCHEDULE
# =============================================================================

@dataclass(frozen=True, eq=False)
class GainSchedule:
  """
  The p periodic Riccati solutions P_k and feedback gains K_k.

  `inversions` counts the 2n x 2n inversions the producing solver was
  charged for; `refinement_steps` counts the accepted Newton steps applied
  after the subspace solve. P and K are stored C-contiguous and
  read-only.
  """
  P_list: Tuple[np.ndarray, ...]
  K_list: Tuple[np.ndarray, ...]
  ts: float
  solver_tag: SolverTag
  inversions: int = 0
  refinement_steps: int = 0

  def __post_init__(self) -> None:
    if len(self.P_list) != len(self.K_list) or not self.P_list:
      raise DimensionMismatch(
        f"need matching non-empty P and K lists, got {len(self.P_list)} and {len(self.K_list)}"
      )
    P_list = tuple(np.array(P, dtype=float, order="C", copy=True) for P in self.P_list)
    K_list = tuple(np.array(K, dtype=float, order="C", copy=True) for K in self.K_list)
    for arr in P_list + K_list:
      arr.setflags(write=False)
    object.__setattr__(self, "P_list", P_list)
    object.__setattr__(self, "K_list", K_list)
    object.__setattr__(self, "solver_tag", SolverTag(self.solver_tag))
    object.__setattr__(self, "ts", float(self.ts))

  @property
  def p(self) -> int:
    return len(self.P_list)

  @property
  def n(self) -> int:
    return self.P_list[0].shape[0]

  @property
  def m(self) -> int:
    return self.K_list[0].shape[0]

  def P(self, k: int) -> np.ndarray:
    """P_{k mod p}."""
    return self.P_list[k % self.p]

  def K(self, k: int) -> np.ndarray:
    """K_{k mod p}."""
    return self.K_list[k % self.p]

  def psd_margin(self) -> float:
    """min_k lambda_min(P_k) / ||P_k||; zero matrices count as 0."""
    margins = []
    for P in self.P_list:
      norm = np.linalg.norm(P, 2)
      margins.append(0.0 if norm == 0 else float(np.min(np.linalg.eigvalsh(P)) / norm))
    return min(margins)

  def symmetry_error(self) -> float:
    """max_k ||P_k - P_k^T|| / ||P_k||."""
    errors = [
      0.0 if np.linalg.norm(P) == 0 else float(np.linalg.norm(P - P.T) / np.linalg.norm(P))
      for P in self.P_list
    ]
    return max(errors)

  def check_compatible(self, pm: PeriodicDiscreteModel) -> None:
    """Raise DimensionMismatch unless the schedule fits the plant."""
    if (self.p, self.n, self.m) != (pm.p, pm.n, pm.m):
      raise DimensionMismatch(
        f"schedule (p={self.p}, n={self.n}, m={self.m}) does not fit "
        f"plant (p={pm.p}, n={pm.n}, m={pm.m})"
      )
    if not np.isclose(self.ts, pm.ts, rtol=1e-12, atol=0.0):
      raise DimensionMismatch(f"schedule ts {self.ts} differs from plant ts {pm.ts}")

  def to_dict(self) -> dict:
    """Summary for reports (matrices omitted)."""
    return {
      "solver_tag": self.solver_tag.value,
      "p": self.p,
      "n": self.n,
      "m": self.m,
      "ts": self.ts,
      "inversions": self.inversions,
      "refinement_steps": self.refinement_steps,
      "psd_margin": self.psd_margin(),
      "symmetry_error": self.symmetry_error(),
    }


def riccati_residual(
  pm: PeriodicDiscreteModel, weights: WeightConfig, schedule: GainSchedule
) -> np.ndarray:
  """
  Relative residual of the periodic Riccati equation at every k.

  r_k = ||P_k - step(P_{k+1})|| / max(||P_k||, ||step(P_{k+1})||),
  P_p = P_0.

  Returns:
    Array of p residuals
  """
  if schedule.p != pm.p:
    raise DimensionMismatch(f"schedule has p={schedule.p}, plant has p={pm.p}")

  residuals = np.empty(pm.p)
  for k in range(pm.p):
    rhs = riccati_step(pm.Ak, pm.Bk(k), weights.Q, weights.R, schedule.P(k + 1))
    residuals[k] = relative_difference(schedule.P(k), rhs)
  return residuals
