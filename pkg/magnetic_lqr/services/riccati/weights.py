"""
LQR weight matrices and their admissibility checks.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from magnetic_lqr.core.exceptions import (
  DetectabilityNotAsserted,
  DimensionMismatch,
  IndefiniteR,
  NegativeQ,
)

# Relative slack on the smallest eigenvalue of a semi-definite weight
PSD_SLACK = 1e-12


def _as_matrix(values) -> np.ndarray:
  return np.atleast_2d(np.array(values, dtype=float, copy=True))


def _symmetry_gap(M: np.ndarray) -> float:
  return float(np.max(np.abs(M - M.T))) if M.size else 0.0


def validate_state_weight(Q, name: str = "Q") -> np.ndarray:
  """
  Check that a state weight is symmetric positive semi-definite.

  Returns:
    The weight as a 2-D float array

  Raises:
    NegativeQ: not square, not symmetric, or an eigenvalue below
      -PSD_SLACK * ||Q||
  """
  Q = _as_matrix(Q)
  if Q.shape[0] != Q.shape[1]:
    raise NegativeQ(f"{name} must be square, got shape {Q.shape}")
  scale = max(np.linalg.norm(Q), 1.0)
  if _symmetry_gap(Q) > PSD_SLACK * scale:
    raise NegativeQ(f"{name} must be symmetric")
  min_eig = float(np.min(np.linalg.eigvalsh(Q)))
  if min_eig < -PSD_SLACK * np.linalg.norm(Q):
    raise NegativeQ(
      f"{name} must be positive semi-definite (min eigenvalue {min_eig:.3e})",
      detail={"min_eigenvalue": min_eig},
    )
  return Q


def validate_input_weight(R) -> np.ndarray:
  """
  Check that the input weight is symmetric positive definite.

  Raises:
    IndefiniteR: not square, not symmetric, or not positive definite
  """
  R = _as_matrix(R)
  if R.shape[0] != R.shape[1]:
    raise IndefiniteR(f"R must be square, got shape {R.shape}")
  if _symmetry_gap(R) > PSD_SLACK * max(np.linalg.norm(R), 1.0):
    raise IndefiniteR("R must be symmetric")
  min_eig = float(np.min(np.linalg.eigvalsh(R)))
  if min_eig <= 0:
    raise IndefiniteR(
      f"R must be positive definite (min eigenvalue {min_eig:.3e})",
      detail={"min_eigenvalue": min_eig},
    )
  return R


def check_weight_shapes(Q: np.ndarray, R: np.ndarray, n: int, m: int) -> None:
  """Raise DimensionMismatch unless Q is n x n and R is m x m."""
  if Q.shape != (n, n):
    raise DimensionMismatch(f"Q must be {n}x{n}, got {Q.shape}")
  if R.shape != (m, m):
    raise DimensionMismatch(f"R must be {m}x{m}, got {R.shape}")


@dataclass(frozen=True, eq=False)
class WeightConfig:
  """
  State, input and terminal weights of the periodic LQR problem.

  QN is used only by the finite-horizon recursion oracle and defaults to
  Q. A semi-definite Q is accepted only when the caller asserts that
  (Ak, Q) is detectable.
  """
  Q: np.ndarray
  R: np.ndarray
  QN: Optional[np.ndarray] = None
  assume_detectable: bool = False

  def __post_init__(self) -> None:
    Q = validate_state_weight(self.Q)
    R = validate_input_weight(self.R)
    QN = Q.copy() if self.QN is None else validate_state_weight(self.QN, name="QN")
    if QN.shape != Q.shape:
      raise DimensionMismatch(f"QN must match Q's shape {Q.shape}, got {QN.shape}")

    if not self.assume_detectable and float(np.min(np.linalg.eigvalsh(Q))) <= 0:
      raise DetectabilityNotAsserted(
        "Q is only positive semi-definite; set weights.assume_detectable "
        "to assert that (Ak, Q) is detectable"
      )

    for name, value in (("Q", Q), ("R", R), ("QN", QN)):
      value.setflags(write=False)
      object.__setattr__(self, name, value)

  @property
  def n(self) -> int:
    """State dimension."""
    return self.Q.shape[0]

  @property
  def m(self) -> int:
    """Input dimension."""
    return self.R.shape[0]

  def to_dict(self) -> dict:
    """Convert to dictionary representation."""
    return {
      "Q": self.Q.tolist(),
      "R": self.R.tolist(),
      "QN": self.QN.tolist(),
      "assume_detectable": self.assume_detectable,
    }
