"""
Riccati Solvers

Invariant-subspace solvers for the time-invariant and the periodic
discrete algebraic Riccati equation:

- solve_dare_lti: Z = E^-1 F, inside-first Schur, P = U21 U11^-1
- solve_periodic_gamma: Gamma_k, outside-first Schur, P_k = W21 W11^-1
- solve_periodic_pi: Pi_k, inside-first Schur, P_k = T21 T11^-1
- solve_periodic_eigen: Gamma_k eigenvectors, P_k = V21 V11^-1

Every subspace estimate is then polished by newton_refine; accepted steps
are reported in GainSchedule.refinement_steps, separately from the
inversion count. Per-k solves are independent and run on a thread pool
when more than one worker is configured.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Type

import numpy as np
import scipy.linalg

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import (
  DefectiveMatrix,
  DimensionMismatch,
  NumericalError,
  SingularAk,
  SingularU11,
  SingularV11,
  SingularW11,
  UnitCircleEigenvalue,
)
from magnetic_lqr.services.riccati.oracle import backward_recursion_oracle
from magnetic_lqr.services.riccati.schedule import (
  GainSchedule,
  SolverTag,
  closed_loop_matrix,
  feedback_gain,
  gains_from_solutions,
  relative_difference,
  riccati_step,
)
from magnetic_lqr.services.riccati.weights import (
  WeightConfig,
  check_weight_shapes,
  validate_input_weight,
  validate_state_weight,
)
from magnetic_lqr.services.symplectic.pencil import (
  E_LABEL,
  F_LABEL,
  SymplecticPencil,
  gamma_product,
  pi_product,
)
from magnetic_lqr.services.symplectic.schur import SchurOrdering, ordered_real_schur
from magnetic_lqr.utils.logger import log_duration

logger = logging.getLogger(__name__)


# =============================================================================
# SUBSPACE RATIOS
# =============================================================================

def subspace_ratio(
  X11: np.ndarray,
  X21: np.ndarray,
  error_cls: Type[NumericalError] = SingularW11,
) -> np.ndarray:
  """
  Symmetrized X21 X11^-1, computed by solving X11^T Y^T = X21^T.

  Raises:
    error_cls: X11 is numerically singular
  """
  cond = np.linalg.cond(X11)
  if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
    raise error_cls(
      f"basis block is numerically singular (condition number {cond:.3e})",
      detail={"cond": float(cond)},
    )
  P = scipy.linalg.solve(X11.T, X21.T).T
  return 0.5 * (P + P.T)


def eigen_ratio(M, unit_circle_tol: Optional[float] = None) -> np.ndarray:
  """
  P = V21 V11^-1 from the eigenvectors of M for eigenvalues outside the
  unit circle.

  Args:
    M: 2n x 2n matrix with distinct eigenvalues
    unit_circle_tol: Required margin |log|lambda|| (defaults to UNIT_CIRCLE_TOL)

  Raises:
    DefectiveMatrix: eigenvalues not distinct, or the ratio keeps an
      imaginary part above EIGEN_IMAG_TOL
    UnitCircleEigenvalue: the spectrum does not split n/n with margin
    SingularV11: the selected eigenvector block is singular
  """
  M = np.asarray(M, dtype=float)
  n = M.shape[0] // 2
  tol = settings.UNIT_CIRCLE_TOL if unit_circle_tol is None else unit_circle_tol

  eigenvalues, V = scipy.linalg.eig(M)
  scale = max(1.0, float(np.max(np.abs(eigenvalues))))
  gaps = np.abs(eigenvalues[:, None] - eigenvalues[None, :])
  np.fill_diagonal(gaps, np.inf)
  min_gap = float(np.min(gaps)) / scale
  if min_gap <= settings.EIGEN_DISTINCT_TOL:
    raise DefectiveMatrix(
      f"eigenvalues are not distinct (relative gap {min_gap:.3e})",
      detail={"min_gap": min_gap},
    )

  with np.errstate(divide="ignore"):
    log_magnitude = np.log(np.abs(eigenvalues))
  margin = float(np.min(np.abs(log_magnitude)))
  outside = log_magnitude > 0
  if margin <= tol or int(np.count_nonzero(outside)) != n:
    raise UnitCircleEigenvalue(
      f"{np.count_nonzero(outside)} of {2 * n} eigenvalues outside the unit circle "
      f"(margin {margin:.3e})",
      detail={"outside": int(np.count_nonzero(outside)), "margin": margin},
    )

  V_out = V[:, outside]
  V11 = V_out[:n, :]
  V21 = V_out[n:, :]
  cond = np.linalg.cond(V11)
  if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
    raise SingularV11(
      f"eigenvector block V11 is numerically singular (condition number {cond:.3e})",
      detail={"cond": float(cond)},
    )

  P = scipy.linalg.solve(V11.T, V21.T).T
  residue = float(np.max(np.abs(P.imag)))
  if residue > settings.EIGEN_IMAG_TOL * max(1.0, float(np.linalg.norm(P.real))):
    raise DefectiveMatrix(
      f"eigenvector ratio keeps an imaginary part of {residue:.3e}",
      detail={"imag_residue": residue},
    )
  P = P.real
  return 0.5 * (P + P.T)


# =============================================================================
# NEWTON REFINEMENT
# =============================================================================

def _max_residual(
  Ak: np.ndarray,
  Bk_list: Sequence[np.ndarray],
  Q: np.ndarray,
  R: np.ndarray,
  P_list: Sequence[np.ndarray],
) -> float:
  p = len(P_list)
  return max(
    relative_difference(P_list[k], riccati_step(Ak, Bk_list[k], Q, R, P_list[(k + 1) % p]))
    for k in range(p)
  )


def newton_refine(
  Ak: np.ndarray,
  Bk_list: Sequence[np.ndarray],
  Q: np.ndarray,
  R: np.ndarray,
  P_list: Sequence[np.ndarray],
  steps: Optional[int] = None,
) -> Tuple[List[np.ndarray], int]:
  """
  Hewer-Newton refinement of a stabilizing periodic solution.

  Each step freezes the gains K_k of the current solution and solves the
  periodic Stein equation

    P_k = Acl_k^T P_{k+1} Acl_k + Q + K_k^T R K_k,   Acl_k = Ak - Bk K_k

  with one discrete Lyapunov solve on the closed-loop monodromy, then
  propagates P_0 backward over the period. A step is kept only if it
  lowers the largest relative Riccati residual. No 2n x 2n matrix is
  inverted.

  Args:
    Ak: Constant state matrix
    Bk_list: Input matrices B_0..B_{p-1} (one entry for the time-invariant case)
    P_list: Stabilizing estimate P_0..P_{p-1}
    steps: Maximum number of steps (defaults to RICCATI_REFINEMENT_STEPS)

  Returns:
    (refined P_list, number of accepted steps)
  """
  steps = settings.RICCATI_REFINEMENT_STEPS if steps is None else steps
  p = len(Bk_list)
  n = Ak.shape[0]
  best = [np.asarray(P, dtype=float) for P in P_list]
  best_residual = _max_residual(Ak, Bk_list, Q, R, best)
  accepted = 0

  for _ in range(steps):
    if best_residual == 0.0:
      break
    K = [feedback_gain(Ak, Bk_list[k], R, best[(k + 1) % p]) for k in range(p)]
    Acl = [closed_loop_matrix(Ak, Bk_list[k], K[k]) for k in range(p)]
    W = [Q + K[k].T @ R @ K[k] for k in range(p)]

    transition = np.eye(n)
    forced = np.zeros((n, n))
    for k in range(p):
      forced += transition.T @ W[k] @ transition
      transition = Acl[k] @ transition
    if np.max(np.abs(np.linalg.eigvals(transition))) >= 1.0:
      logger.warning("Newton refinement skipped: estimate is not stabilizing")
      break

    P0 = scipy.linalg.solve_discrete_lyapunov(transition.T, forced)
    candidate: List[np.ndarray] = [0.5 * (P0 + P0.T)] * p
    P_next = candidate[0]
    for k in range(p - 1, 0, -1):
      P_k = Acl[k].T @ P_next @ Acl[k] + W[k]
      candidate[k] = 0.5 * (P_k + P_k.T)
      P_next = candidate[k]

    residual = _max_residual(Ak, Bk_list, Q, R, candidate)
    if not residual < best_residual:
      break
    best, best_residual = candidate, residual
    accepted += 1

  logger.debug(
    "Newton refinement done",
    extra={"accepted_steps": accepted, "residual": best_residual},
  )
  return best, accepted


# =============================================================================
# TIME-INVARIANT DARE
# =============================================================================

def solve_dare_lti(
  Ak, Bk, Q, R, unit_circle_tol: Optional[float] = None
) -> np.ndarray:
  """
  Stabilizing solution of the discrete algebraic Riccati equation.

  Forms Z = E^-1 F = [A + G A^-T Q, -G A^-T; -A^-T Q, A^-T] with
  G = B R^-1 B^T, orders its Schur form inside-first, takes the ratio of
  the stable-subspace basis blocks and refines it with Newton steps.

  Args:
    Ak: n x n state matrix (invertible)
    Bk: n x m input matrix
    Q: State weight, symmetric PSD
    R: Input weight, symmetric PD

  Returns:
    Symmetric n x n solution P

  Raises:
    SingularAk: Ak numerically singular
    UnitCircleEigenvalue: Z has eigenvalues on the unit circle
    SingularU11: the stable subspace is not a graph over the state
  """
  A = np.atleast_2d(np.asarray(Ak, dtype=float))
  B = np.atleast_2d(np.asarray(Bk, dtype=float))
  Q = validate_state_weight(Q)
  R = validate_input_weight(R)
  n = A.shape[0]
  if A.shape != (n, n) or B.shape[0] != n:
    raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
  check_weight_shapes(Q, R, n, B.shape[1])

  cond = np.linalg.cond(A)
  if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
    raise SingularAk(f"A is numerically singular (condition number {cond:.3e})")

  A_invT = scipy.linalg.inv(A).T
  G = B @ scipy.linalg.solve(R, B.T, assume_a="pos")
  Z = np.block([[A + G @ A_invT @ Q, -G @ A_invT], [-A_invT @ Q, A_invT]])

  result = ordered_real_schur(Z, SchurOrdering.INSIDE_FIRST, unit_circle_tol)
  P = subspace_ratio(result.W11, result.W21, SingularU11)
  refined, _ = newton_refine(A, [B], Q, R, [P])
  return refined[0]


# =============================================================================
# PERIODIC DARE
# =============================================================================

def _over_period(solve_k: Callable[[int], np.ndarray], p: int, workers: int) -> List[np.ndarray]:
  """Evaluate solve_k for k = 0..p-1, in k order."""
  if workers <= 1 or p == 1:
    return [solve_k(k) for k in range(p)]
  with ThreadPoolExecutor(max_workers=min(workers, p)) as pool:
    return list(pool.map(solve_k, range(p)))


def _check_weights(pencil: SymplecticPencil, weights: WeightConfig) -> None:
  if not (np.array_equal(pencil.Q, weights.Q) and np.array_equal(pencil.R, weights.R)):
    raise DimensionMismatch("pencil was built with different weights")


def _schedule(
  pencil: SymplecticPencil,
  weights: WeightConfig,
  P_list: List[np.ndarray],
  tag: SolverTag,
  inversions: int,
) -> GainSchedule:
  pm = pencil.model
  P_list, accepted = newton_refine(
    pm.Ak, [pm.Bk(k) for k in range(pm.p)], weights.Q, weights.R, P_list
  )
  return GainSchedule(
    P_list=tuple(P_list),
    K_list=gains_from_solutions(pm, weights.R, P_list),
    ts=pm.ts,
    solver_tag=tag,
    inversions=inversions,
    refinement_steps=accepted,
  )


def solve_periodic_gamma(
  pencil: SymplecticPencil,
  weights: WeightConfig,
  unit_circle_tol: Optional[float] = None,
  workers: Optional[int] = None,
) -> GainSchedule:
  """
  Periodic Riccati solutions from the inversion-free products Gamma_k.

  Gamma_k maps z_{k+p} to z_k, so the stabilizing subspace is its
  outside-the-unit-circle invariant subspace [W11; W21] and
  P_k = W21 W11^-1.

  Raises:
    UnitCircleEigenvalue: dichotomy fails for some Gamma_k
    SingularW11: the subspace basis block is singular
  """
  _check_weights(pencil, weights)
  workers = workers or settings.SOLVER_WORKERS

  def solve_k(k: int) -> np.ndarray:
    result = ordered_real_schur(
      gamma_product(pencil, k), SchurOrdering.OUTSIDE_FIRST, unit_circle_tol
    )
    P = subspace_ratio(result.W11, result.W21, SingularW11)
    logger.debug("Gamma solve done", extra={"k": k})
    return P

  P_list = _over_period(solve_k, pencil.p, workers)
  return _schedule(pencil, weights, P_list, SolverTag.GAMMA, pencil.counter.count(F_LABEL))


def solve_periodic_pi(
  pencil: SymplecticPencil,
  weights: WeightConfig,
  unit_circle_tol: Optional[float] = None,
  workers: Optional[int] = None,
) -> GainSchedule:
  """
  Periodic Riccati solutions from the forward products Pi_k.

  Pi_k maps z_k to z_{k+p}; P_k = T21 T11^-1 from its inside-first Schur
  basis. Costs one inversion per E_k.

  Raises:
    SingularEk: some E_k cannot be inverted
    UnitCircleEigenvalue: dichotomy fails for some Pi_k
    SingularW11: the subspace basis block is singular
  """
  _check_weights(pencil, weights)
  workers = workers or settings.SOLVER_WORKERS

  def solve_k(k: int) -> np.ndarray:
    result = ordered_real_schur(
      pi_product(pencil, k), SchurOrdering.INSIDE_FIRST, unit_circle_tol
    )
    return subspace_ratio(result.W11, result.W21, SingularW11)

  P_list = _over_period(solve_k, pencil.p, workers)
  return _schedule(pencil, weights, P_list, SolverTag.PI, pencil.counter.count(E_LABEL))


def solve_periodic_eigen(
  pencil: SymplecticPencil,
  weights: WeightConfig,
  unit_circle_tol: Optional[float] = None,
  workers: Optional[int] = None,
) -> GainSchedule:
  """
  Periodic Riccati solutions from the eigenvectors of Gamma_k.

  Requires Gamma_k to have distinct eigenvalues; less robust than the
  Schur paths and kept for cross-validation.

  Raises:
    DefectiveMatrix, UnitCircleEigenvalue, SingularV11
  """
  _check_weights(pencil, weights)
  workers = workers or settings.SOLVER_WORKERS

  def solve_k(k: int) -> np.ndarray:
    return eigen_ratio(gamma_product(pencil, k), unit_circle_tol)

  P_list = _over_period(solve_k, pencil.p, workers)
  return _schedule(pencil, weights, P_list, SolverTag.EIGEN, pencil.counter.count(F_LABEL))


def solve_schedule(
  tag,
  pencil: SymplecticPencil,
  weights: WeightConfig,
  unit_circle_tol: Optional[float] = None,
  workers: Optional[int] = None,
  num_periods: Optional[int] = None,
  convergence_tol: Optional[float] = None,
) -> GainSchedule:
  """
  Run the solver named by `tag` (SolverTag or a short CLI name).

  Returns:
    GainSchedule tagged with the solver used
  """
  tag = tag if isinstance(tag, SolverTag) else SolverTag.from_name(tag)

  with log_duration(logger, "periodic_riccati_solve", solver=tag.value, p=pencil.p) as outcome:
    if tag is SolverTag.GAMMA:
      schedule = solve_periodic_gamma(pencil, weights, unit_circle_tol, workers)
    elif tag is SolverTag.PI:
      schedule = solve_periodic_pi(pencil, weights, unit_circle_tol, workers)
    elif tag is SolverTag.EIGEN:
      schedule = solve_periodic_eigen(pencil, weights, unit_circle_tol, workers)
    else:
      schedule = backward_recursion_oracle(
        pencil.model, weights, num_periods, convergence_tol
      )
    outcome["inversions"] = schedule.inversions

  return schedule
