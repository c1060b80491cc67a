"""
Structured 2n x 2n matrices: L = [0, I; -I, 0] and the Hamiltonian and
symplectic predicates built on it.
"""

import numpy as np

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import OddDimension, SingularInput


def half_dimension(M: np.ndarray) -> int:
  """Return n for a square 2n x 2n matrix, else raise OddDimension."""
  if M.ndim != 2 or M.shape[0] != M.shape[1]:
    raise OddDimension(f"expected a square matrix, got shape {M.shape}")
  if M.shape[0] == 0 or M.shape[0] % 2:
    raise OddDimension(f"expected even dimension 2n, got {M.shape[0]}")
  return M.shape[0] // 2


def structured_l(n: int) -> np.ndarray:
  """
  Dense L = [0, I; -I, 0] of size 2n.

  L satisfies L^T = L^-1 = -L, so L^-1 is never formed; callers use -L.
  """
  if n < 1:
    raise OddDimension(f"n must be >= 1, got {n}")
  eye = np.eye(n)
  zero = np.zeros((n, n))
  return np.block([[zero, eye], [-eye, zero]])


def is_hamiltonian(M, tol: float = None) -> bool:
  """
  True iff ||L^-1 M^T L + M|| <= tol * max(1, ||M||).

  Args:
    M: Square matrix of even dimension
    tol: Relative tolerance (defaults to HAMILTONIAN_TOL)

  Raises:
    OddDimension: M is not 2n x 2n
  """
  M = np.asarray(M, dtype=float)
  n = half_dimension(M)
  tol = settings.HAMILTONIAN_TOL if tol is None else tol

  L = structured_l(n)
  residual = np.linalg.norm(-L @ M.T @ L + M)
  return bool(residual <= tol * max(1.0, np.linalg.norm(M)))


def symplectic_residual(M) -> float:
  """
  Absolute residual ||L^-1 M^T L M - I||_F.
  """
  M = np.asarray(M, dtype=float)
  n = half_dimension(M)
  L = structured_l(n)
  residual = np.linalg.norm(-L @ M.T @ L @ M - np.eye(2 * n))
  return float(residual)


def is_symplectic(M, tol: float = None) -> bool:
  """
  True iff ||L^-1 M^T L M - I||_F <= tol.

  Args:
    M: Square invertible matrix of even dimension
    tol: Tolerance (defaults to SYMPLECTIC_TOL)

  Raises:
    OddDimension: M is not 2n x 2n
    SingularInput: M is numerically singular
  """
  M = np.asarray(M, dtype=float)
  half_dimension(M)
  tol = settings.SYMPLECTIC_TOL if tol is None else tol

  cond = np.linalg.cond(M)
  if not np.isfinite(cond) or cond > settings.SINGULAR_COND_LIMIT:
    raise SingularInput(
      f"matrix is numerically singular (condition number {cond:.3e})",
      detail={"cond": float(cond)},
    )
  return symplectic_residual(M) <= tol
