"""
Ordered real Schur decomposition with a unit-circle split.

M = W S W^T with W orthogonal and S quasi-upper-triangular; the leading n
eigenvalues (block S11) are those strictly outside (or inside) the unit
circle. Complex pairs stay in their 2x2 blocks.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import UnitCircleEigenvalue
from magnetic_lqr.services.symplectic.structure import half_dimension

logger = logging.getLogger(__name__)


class SchurOrdering(str, Enum):
  """Which half of the spectrum goes first."""
  OUTSIDE_FIRST = "outside-first"
  INSIDE_FIRST = "inside-first"

  def selects(self, eigenvalues: np.ndarray) -> np.ndarray:
    """Boolean mask of eigenvalues belonging in the leading block."""
    magnitude = np.abs(eigenvalues)
    if self is SchurOrdering.OUTSIDE_FIRST:
      return magnitude > 1.0
    return magnitude < 1.0


@dataclass(frozen=True, eq=False)
class OrderedSchurResult:
  """Schur vectors W, Schur form S and the ordering that produced them."""
  W: np.ndarray
  S: np.ndarray
  ordering: SchurOrdering

  @property
  def n(self) -> int:
    """Half dimension."""
    return self.W.shape[0] // 2

  @property
  def W11(self) -> np.ndarray:
    return self.W[: self.n, : self.n]

  @property
  def W12(self) -> np.ndarray:
    return self.W[: self.n, self.n :]

  @property
  def W21(self) -> np.ndarray:
    return self.W[self.n :, : self.n]

  @property
  def W22(self) -> np.ndarray:
    return self.W[self.n :, self.n :]

  @property
  def S11(self) -> np.ndarray:
    return self.S[: self.n, : self.n]

  @property
  def S22(self) -> np.ndarray:
    return self.S[self.n :, self.n :]

  def leading_eigenvalues(self) -> np.ndarray:
    """Eigenvalues of S11."""
    return scipy.linalg.eigvals(self.S11)

  def trailing_eigenvalues(self) -> np.ndarray:
    """Eigenvalues of S22."""
    return scipy.linalg.eigvals(self.S22)


def _dichotomy_margin(eigenvalues: np.ndarray) -> float:
  """Smallest |log|lambda|| over the given eigenvalues."""
  with np.errstate(divide="ignore"):
    return float(np.min(np.abs(np.log(np.abs(eigenvalues)))))


def ordered_real_schur(
  M,
  ordering: SchurOrdering = SchurOrdering.OUTSIDE_FIRST,
  unit_circle_tol: float = None,
) -> OrderedSchurResult:
  """
  Real Schur form of M with the unit-circle split ordered first.

  Args:
    M: Real 2n x 2n matrix whose spectrum splits n/n across the unit circle
    ordering: Half of the spectrum to place in S11
    unit_circle_tol: Required margin |log|lambda|| for every eigenvalue
      (defaults to UNIT_CIRCLE_TOL)

  Returns:
    OrderedSchurResult

  Raises:
    OddDimension: M is not 2n x 2n
    UnitCircleEigenvalue: an eigenvalue lies within the margin of the unit
      circle, or the split is not n/n
  """
  M = np.asarray(M, dtype=float)
  n = half_dimension(M)
  ordering = SchurOrdering(ordering)
  tol = settings.UNIT_CIRCLE_TOL if unit_circle_tol is None else unit_circle_tol

  if ordering is SchurOrdering.OUTSIDE_FIRST:
    def select(re, im):
      return re * re + im * im > 1.0
  else:
    def select(re, im):
      return re * re + im * im < 1.0

  try:
    S, W, sdim = scipy.linalg.schur(M, output="real", sort=select)
  except (scipy.linalg.LinAlgError, ValueError) as exc:
    raise UnitCircleEigenvalue(
      f"ordered Schur reordering failed: {exc}", detail={"n": n}
    ) from exc

  result = OrderedSchurResult(W=W, S=S, ordering=ordering)
  if sdim != n:
    raise UnitCircleEigenvalue(
      f"{sdim} of {2 * n} eigenvalues selected for the {ordering.value} block, expected {n}",
      detail={"selected": int(sdim), "n": n},
    )

  leading = result.leading_eigenvalues()
  trailing = result.trailing_eigenvalues()
  margin = min(_dichotomy_margin(leading), _dichotomy_margin(trailing))
  if (
    margin <= tol
    or not np.all(ordering.selects(leading))
    or np.any(ordering.selects(trailing))
  ):
    raise UnitCircleEigenvalue(
      f"dichotomy margin {margin:.3e} does not exceed {tol:.1e}",
      detail={"margin": margin, "tol": tol},
    )

  logger.debug(
    "Ordered Schur form computed",
    extra={"n": n, "ordering": ordering.value, "margin": margin},
  )
  return result
