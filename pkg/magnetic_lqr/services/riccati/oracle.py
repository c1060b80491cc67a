"""
Backward-recursion oracle for the periodic Riccati equation.

Iterates the one-step Riccati map backward from the terminal weight QN,
whole periods at a time, until the schedule stops changing. Slow but
independent of the pencil machinery.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import ConfigError, DimensionMismatch, NotConverged
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.schedule import (
  GainSchedule,
  SolverTag,
  gains_from_solutions,
  relative_difference,
  riccati_step,
)
from magnetic_lqr.services.riccati.weights import WeightConfig

logger = logging.getLogger(__name__)


def backward_recursion_oracle(
  pm: PeriodicDiscreteModel,
  weights: WeightConfig,
  num_periods: Optional[int] = None,
  convergence_tol: Optional[float] = None,
) -> GainSchedule:
  """
  Periodic schedule from the finite-horizon recursion started at P_N = QN.

  Convergence is declared when the largest relative change of P_k between
  consecutive periods is at most convergence_tol. The first period is
  compared against the boundary value QN.

  Args:
    pm: Periodic plant
    weights: Q, R and the terminal weight QN
    num_periods: Maximum number of periods to iterate (defaults to ORACLE_PERIODS)
    convergence_tol: Relative change threshold (defaults to ORACLE_CONVERGENCE_TOL)

  Returns:
    GainSchedule of the last period, tagged recursion-oracle

  Raises:
    NotConverged: the change is still above tolerance after num_periods
  """
  defaults = settings.oracle_config
  num_periods = defaults["num_periods"] if num_periods is None else num_periods
  convergence_tol = (
    defaults["convergence_tol"] if convergence_tol is None else convergence_tol
  )
  if num_periods < 1:
    raise ConfigError(f"num_periods must be >= 1, got {num_periods}")
  if weights.n != pm.n or weights.m != pm.m:
    raise DimensionMismatch(
      f"weights are for n={weights.n}, m={weights.m}; plant has n={pm.n}, m={pm.m}"
    )

  p = pm.p
  P_next = weights.QN
  previous: Optional[List[np.ndarray]] = None
  achieved = math.inf

  for period in range(1, num_periods + 1):
    current: List[np.ndarray] = [None] * p
    for k in range(p - 1, -1, -1):
      P_next = riccati_step(pm.Ak, pm.Bk(k), weights.Q, weights.R, P_next)
      current[k] = P_next

    if previous is None:
      achieved = relative_difference(current[0], weights.QN)
    else:
      achieved = max(relative_difference(c, q) for c, q in zip(current, previous))

    logger.debug(
      "Recursion period done",
      extra={"period": period, "relative_change": achieved},
    )
    if achieved <= convergence_tol:
      logger.info(
        "Backward recursion converged",
        extra={"periods": period, "relative_change": achieved, "p": p},
      )
      return GainSchedule(
        P_list=tuple(current),
        K_list=gains_from_solutions(pm, weights.R, current),
        ts=pm.ts,
        solver_tag=SolverTag.RECURSION,
        inversions=0,
      )
    previous = current

  raise NotConverged(num_periods, achieved)
