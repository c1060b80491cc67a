"""
Symplectic Pencil of the Periodic Riccati Equation

For the periodic plant (Ak, Bk) and weights (Q, R) the Riccati recursion
is equivalent to the pencil

  E_k = [I, Bk R^-1 Bk^T; 0, Ak^T],   F = [Ak, 0; -Q, I]

whose period products carry the stabilizing solution in an invariant
subspace. Two products are provided:

  Gamma_k = (F^-1 E_k)(F^-1 E_{k+1}) ... (F^-1 E_{k+p-1})   (no inversion)
  Pi_k    = (E_{k+p-1}^-1 F) ... (E_{k+1}^-1 F)(E_k^-1 F)   (p inversions)

F^-1 has the closed form [Ak^-1, 0; Q Ak^-1, I] and is formed once per
pencil. Every 2n x 2n inversion is tallied on the pencil's counter.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import IndexOutOfRange, SingularAk, SingularEk
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.weights import (
  check_weight_shapes,
  validate_input_weight,
  validate_state_weight,
)

logger = logging.getLogger(__name__)

F_LABEL = "F"
E_LABEL = "E"


# =============================================================================
# INVERSION ACCOUNTING
# =============================================================================

@dataclass
class InversionCounter:
  """Thread-safe tally of 2n x 2n inversions, keyed by operand label."""
  counts: Dict[str, int] = field(default_factory=dict)
  _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

  def record(self, label: str) -> None:
    """Record one inversion of the operand named `label`."""
    with self._lock:
      self.counts[label] = self.counts.get(label, 0) + 1

  def count(self, label: Optional[str] = None) -> int:
    """Inversions recorded for `label`, or in total when label is None."""
    with self._lock:
      if label is None:
        return sum(self.counts.values())
      return self.counts.get(label, 0)

  def to_dict(self) -> dict:
    """Convert to dictionary representation."""
    with self._lock:
      return {"total": sum(self.counts.values()), **self.counts}


# =============================================================================
# PENCIL
# =============================================================================

class SymplecticPencil:
  """
  The pair (E_k, F) for k = 0..p-1, plus the precomputed F^-1.

  All matrices are read-only. E_k inverses are formed lazily, at most once
  each, the first time a Pi product needs them; concurrent callers share
  the same inverse.
  """

  def __init__(
    self,
    model: PeriodicDiscreteModel,
    Q: np.ndarray,
    R: np.ndarray,
    Ek_list: Tuple[np.ndarray, ...],
    F: np.ndarray,
    F_inv: np.ndarray,
    counter: InversionCounter,
  ):
    self.model = model
    self.Q = Q
    self.R = R
    self.Ek_list = Ek_list
    self.F = F
    self.F_inv = F_inv
    self.counter = counter

    factors = []
    for Ek in Ek_list:
      M = F_inv @ Ek
      M.setflags(write=False)
      factors.append(M)
    self._gamma_factors: Tuple[np.ndarray, ...] = tuple(factors)

    self._e_inverses: List[Optional[np.ndarray]] = [None] * len(Ek_list)
    self._lock = threading.Lock()

  @property
  def p(self) -> int:
    """Period length."""
    return len(self.Ek_list)

  @property
  def n(self) -> int:
    """State dimension (pencil matrices are 2n x 2n)."""
    return self.model.n

  def check_index(self, k: int) -> None:
    """Raise IndexOutOfRange unless 0 <= k < p."""
    if not 0 <= k < self.p:
      raise IndexOutOfRange(f"period index {k} outside 0..{self.p - 1}")

  def gamma_factor(self, k: int) -> np.ndarray:
    """M_k = F^-1 E_{k mod p}; a product of stored matrices, no inversion."""
    return self._gamma_factors[k % self.p]

  def e_inverse(self, k: int) -> np.ndarray:
    """E_{k mod p}^-1, computed on first use and recorded as one inversion."""
    j = k % self.p
    with self._lock:
      cached = self._e_inverses[j]
      if cached is not None:
        return cached

      Ek = self.Ek_list[j]
      cond = np.linalg.cond(Ek)
      if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
        raise SingularEk(
          f"E_{j} is numerically singular (condition number {cond:.3e})",
          detail={"k": j, "cond": float(cond)},
        )
      inverse = scipy.linalg.inv(Ek)
      inverse.setflags(write=False)
      self.counter.record(E_LABEL)
      self._e_inverses[j] = inverse
      return inverse

  def to_dict(self) -> dict:
    """Summary for reports."""
    return {
      "n": self.n,
      "p": self.p,
      "inversions": self.counter.to_dict(),
    }


def _frozen(arr: np.ndarray) -> np.ndarray:
  arr = np.array(arr, dtype=float, copy=True)
  arr.setflags(write=False)
  return arr


def build_pencil(pm: PeriodicDiscreteModel, Q, R) -> SymplecticPencil:
  """
  Assemble E_k, F and the closed-form F^-1.

  Args:
    pm: Periodic discrete plant
    Q: State weight, symmetric positive semi-definite
    R: Input weight, symmetric positive definite

  Returns:
    SymplecticPencil with one F inversion recorded

  Raises:
    IndefiniteR: R not symmetric positive definite
    NegativeQ: Q not symmetric positive semi-definite
    SingularAk: Ak numerically singular
  """
  Q = validate_state_weight(Q)
  R = validate_input_weight(R)
  check_weight_shapes(Q, R, pm.n, pm.m)

  n = pm.n
  Ak = pm.Ak
  cond = np.linalg.cond(Ak)
  if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
    raise SingularAk(
      f"Ak is numerically singular (condition number {cond:.3e})",
      detail={"cond": float(cond)},
    )

  eye = np.eye(n)
  zero = np.zeros((n, n))

  Ek_list = []
  for Bk in pm.Bk_list:
    G = Bk @ scipy.linalg.solve(R, Bk.T, assume_a="pos")
    G = 0.5 * (G + G.T)
    Ek_list.append(_frozen(np.block([[eye, G], [zero, Ak.T]])))

  F = _frozen(np.block([[Ak, zero], [-Q, eye]]))

  counter = InversionCounter()
  Ak_inv = scipy.linalg.inv(Ak)
  F_inv = _frozen(np.block([[Ak_inv, zero], [Q @ Ak_inv, eye]]))
  counter.record(F_LABEL)

  logger.debug(
    "Symplectic pencil built",
    extra={"n": n, "p": pm.p, "cond_Ak": float(cond)},
  )
  return SymplecticPencil(
    model=pm,
    Q=_frozen(Q),
    R=_frozen(R),
    Ek_list=tuple(Ek_list),
    F=F,
    F_inv=F_inv,
    counter=counter,
  )


# =============================================================================
# PERIOD PRODUCTS
# =============================================================================

def gamma_product(
  pencil: SymplecticPencil,
  k: int,
  log_factor_norms: Optional[bool] = None,
) -> np.ndarray:
  """
  Gamma_k = M_k M_{k+1} ... M_{k+p-1}, M_j = F^-1 E_j, indices mod p.

  Evaluated right to left without any matrix inversion.

  Args:
    pencil: Symplectic pencil
    k: Period index, 0 <= k < p
    log_factor_norms: Emit the norm of every partial product at DEBUG
      (defaults to LOG_FACTOR_NORMS)

  Raises:
    IndexOutOfRange: k outside 0..p-1
  """
  pencil.check_index(k)
  if log_factor_norms is None:
    log_factor_norms = settings.LOG_FACTOR_NORMS

  product = np.eye(2 * pencil.n)
  for j in range(k + pencil.p - 1, k - 1, -1):
    product = pencil.gamma_factor(j) @ product
    if log_factor_norms:
      logger.debug(
        "Gamma partial product",
        extra={
          "k": k,
          "factor": j % pencil.p,
          "factor_norm": float(np.linalg.norm(pencil.gamma_factor(j), 2)),
          "product_norm": float(np.linalg.norm(product, 2)),
        },
      )
  return product


def pi_product(pencil: SymplecticPencil, k: int) -> np.ndarray:
  """
  Pi_k = N_{k+p-1} ... N_{k+1} N_k, N_j = E_j^-1 F, indices mod p.

  Raises:
    IndexOutOfRange: k outside 0..p-1
    SingularEk: some E_j cannot be inverted
  """
  pencil.check_index(k)

  product = np.eye(2 * pencil.n)
  for j in range(k, k + pencil.p):
    product = (pencil.e_inverse(j) @ pencil.F) @ product
  return product
