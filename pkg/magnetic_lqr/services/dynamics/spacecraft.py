"""
Linearized Reduced-Quaternion Spacecraft Model

Builds the continuous linear time-varying model x' = A x + B(t) m of a
nadir-pointing spacecraft actuated only by magnetic coils, and its
first-order discretization x_{k+1} = A_k x_k + B_k m_k with a periodic
input matrix.

State ordering is (q1, q2, q3, w1, w2, w3): reduced quaternion of the body
frame relative to LVLH followed by body rates. Inputs are the coil dipole
moments (m1, m2, m3) in A*m^2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import (
  ConfigError,
  DimensionMismatch,
  NonPrincipalInertia,
  SingularA,
  SingularAk,
)
from magnetic_lqr.services.dynamics.orbit import (
  OrbitParams,
  magnetic_field,
  orbital_period,
  orbital_rate,
)

logger = logging.getLogger(__name__)

STATE_DIM = 6
INPUT_DIM = 3


def _readonly(values, ndim: Optional[int] = None) -> np.ndarray:
  """Copy into a float array that cannot be modified in place."""
  arr = np.array(values, dtype=float, copy=True)
  if ndim is not None and arr.ndim != ndim:
    raise DimensionMismatch(f"expected a {ndim}-D array, got shape {arr.shape}")
  arr.setflags(write=False)
  return arr


# =============================================================================
# INERTIA
# =============================================================================

@dataclass(frozen=True, eq=False)
class InertiaMatrix:
  """
  Spacecraft inertia matrix J in kg*m^2.

  Stored as a full 3x3 matrix; must be exactly symmetric and positive
  definite.
  """
  J: np.ndarray

  def __post_init__(self) -> None:
    J = _readonly(self.J)
    if J.shape != (3, 3):
      raise ConfigError(f"inertia must be 3x3, got shape {J.shape}")
    if not np.array_equal(J, J.T):
      raise ConfigError("inertia matrix must be symmetric")
    if np.min(np.linalg.eigvalsh(J)) <= 0:
      raise ConfigError("inertia matrix must be positive definite")
    object.__setattr__(self, "J", J)

  @classmethod
  def from_diagonal(cls, j11: float, j22: float, j33: float) -> "InertiaMatrix":
    """Build a principal-axis inertia matrix."""
    return cls(np.diag([j11, j22, j33]))

  @property
  def diagonal(self) -> Tuple[float, float, float]:
    """Principal moments (J11, J22, J33)."""
    return tuple(float(v) for v in np.diag(self.J))

  @property
  def is_diagonal(self) -> bool:
    """True when all products of inertia are zero."""
    return bool(np.count_nonzero(self.J - np.diag(np.diag(self.J))) == 0)

  @property
  def distinct_principal_axes(self) -> bool:
    """J11, J22, J33 pairwise different (A is nonsingular only then)."""
    j11, j22, j33 = self.diagonal
    return j11 != j22 and j11 != j33 and j22 != j33


# =============================================================================
# CONTINUOUS MODEL
# =============================================================================

@dataclass(frozen=True, eq=False)
class ContinuousModel:
  """
  Continuous linearization x' = A x + B(t) m.

  A = [0, I/2; Lambda1, Sigma1] is constant; B(t) = [0; B2(t)] follows the
  dipole field along the orbit.
  """
  A: np.ndarray
  f41: float
  f46: float
  f52: float
  f63: float
  f64: float
  omega0: float
  inertia: InertiaMatrix
  orbit: OrbitParams

  @property
  def lambda1(self) -> np.ndarray:
    """Lower-left 3x3 block of A."""
    return self.A[3:, :3]

  @property
  def sigma1(self) -> np.ndarray:
    """Lower-right 3x3 block of A."""
    return self.A[3:, 3:]

  def b_coefficients(self, t: float) -> Dict[str, float]:
    """
    The six entries of B2(t).

    b42, b43, b53 come from the field; b51, b61, b62 follow from the
    coupling identities b51 = -b42*J11/J22, b61 = -b43*J11/J33,
    b62 = -b53*J22/J33.
    """
    j11, j22, j33 = self.inertia.diagonal
    b1, b2, b3 = magnetic_field(self.orbit, t)

    b42 = b3 / j11
    b43 = -b2 / j11
    b53 = b1 / j22
    return {
      "b42": b42,
      "b43": b43,
      "b53": b53,
      "b51": -b42 * j11 / j22,
      "b61": -b43 * j11 / j33,
      "b62": -b53 * j22 / j33,
    }

  def b2_matrix(self, t: float) -> np.ndarray:
    """Lower 3x3 block of B(t); zero diagonal."""
    c = self.b_coefficients(t)
    return np.array(
      [
        [0.0, c["b42"], c["b43"]],
        [c["b51"], 0.0, c["b53"]],
        [c["b61"], c["b62"], 0.0],
      ]
    )

  def b_matrix(self, t: float) -> np.ndarray:
    """Full 6x3 input matrix B(t); rows 1-3 are zero."""
    B = np.zeros((STATE_DIM, INPUT_DIM))
    B[3:, :] = self.b2_matrix(t)
    return B


def build_continuous(J: InertiaMatrix, orbit: OrbitParams) -> ContinuousModel:
  """
  Assemble the continuous reduced-quaternion model.

  Args:
    J: Inertia matrix; products of inertia must be zero
    orbit: Circular orbit parameters

  Returns:
    ContinuousModel with A and the B(t) factory

  Raises:
    NonPrincipalInertia: J has nonzero off-diagonal entries
    SingularA: two principal moments are equal
  """
  if not J.is_diagonal:
    raise NonPrincipalInertia(
      "inertia must be expressed in principal axes (off-diagonal entries must be zero)"
    )
  if not J.distinct_principal_axes:
    raise SingularA(
      f"principal moments {J.diagonal} are not pairwise distinct; A is singular",
      detail={"inertia_diagonal": list(J.diagonal)},
    )

  j11, j22, j33 = J.diagonal
  w0 = orbital_rate(orbit)

  f41 = 8.0 * (j33 - j22) * w0 ** 2 / j11
  f46 = (-j11 + j22 - j33) * w0 / j11
  f64 = (j11 - j22 + j33) * w0 / j33
  f52 = 6.0 * (j33 - j11) * w0 ** 2 / j22
  f63 = 2.0 * (j11 - j22) * w0 ** 2 / j33

  A = np.zeros((STATE_DIM, STATE_DIM))
  A[:3, 3:] = 0.5 * np.eye(3)
  A[3, 0] = f41
  A[3, 5] = f46
  A[4, 1] = f52
  A[5, 2] = f63
  A[5, 3] = f64

  logger.debug(
    "Continuous model assembled",
    extra={"omega0": w0, "det_A": float(np.linalg.det(A))},
  )

  return ContinuousModel(
    A=_readonly(A),
    f41=f41,
    f46=f46,
    f52=f52,
    f63=f63,
    f64=f64,
    omega0=w0,
    inertia=J,
    orbit=orbit,
  )


# =============================================================================
# DISCRETE MODEL
# =============================================================================

@dataclass(frozen=True, eq=False)
class PeriodicDiscreteModel:
  """
  Periodic plant x_{k+1} = Ak x_k + B_{k mod p} m_k.

  Ak is constant; Bk_list holds one input matrix per sample of the period.
  """
  Ak: np.ndarray
  Bk_list: Tuple[np.ndarray, ...]
  ts: float

  def __post_init__(self) -> None:
    Ak = _readonly(self.Ak, ndim=2)
    if Ak.shape[0] != Ak.shape[1]:
      raise DimensionMismatch(f"Ak must be square, got shape {Ak.shape}")
    if len(self.Bk_list) < 1:
      raise DimensionMismatch("Bk_list must hold at least one matrix")

    Bk_list = tuple(_readonly(Bk, ndim=2) for Bk in self.Bk_list)
    shapes = {Bk.shape for Bk in Bk_list}
    if len(shapes) != 1 or Bk_list[0].shape[0] != Ak.shape[0]:
      raise DimensionMismatch(
        f"every Bk must be {Ak.shape[0]} x m with a common m, got {sorted(shapes)}"
      )
    if not self.ts > 0:
      raise ConfigError(f"ts must be > 0, got {self.ts}")

    object.__setattr__(self, "Ak", Ak)
    object.__setattr__(self, "Bk_list", Bk_list)
    object.__setattr__(self, "ts", float(self.ts))

  @classmethod
  def from_matrices(
    cls, Ak, Bk_list: Sequence, ts: float = 1.0
  ) -> "PeriodicDiscreteModel":
    """Build a synthetic instance (any n, m, p)."""
    return cls(Ak=np.atleast_2d(np.asarray(Ak, dtype=float)),
               Bk_list=tuple(np.atleast_2d(np.asarray(B, dtype=float)) for B in Bk_list),
               ts=ts)

  @property
  def p(self) -> int:
    """Samples per period."""
    return len(self.Bk_list)

  @property
  def n(self) -> int:
    """State dimension."""
    return self.Ak.shape[0]

  @property
  def m(self) -> int:
    """Input dimension."""
    return self.Bk_list[0].shape[1]

  def Bk(self, k: int) -> np.ndarray:
    """Input matrix at sample k (taken modulo p)."""
    return self.Bk_list[k % self.p]

  def to_dict(self) -> dict:
    """Summary of dimensions and timing."""
    return {"n": self.n, "m": self.m, "p": self.p, "ts": self.ts}


def first_singular_sample_time(cm: ContinuousModel) -> float:
  """
  Smallest s > 0 for which I + s*A is singular.

  det(I + s*A) is the product of (1 + s*lambda) over the eigenvalues of A,
  so it vanishes only at s = -1/lambda for real negative lambda. Complex
  pairs contribute |1 + s*lambda|^2 > 0.

  Returns:
    The first singular sample time in seconds, or inf if A has no real
    negative eigenvalue
  """
  eigenvalues = scipy.linalg.eigvals(cm.A)
  candidates = [
    -1.0 / ev.real
    for ev in eigenvalues
    if abs(ev.imag) <= 1e-12 * max(abs(ev), 1e-300) and ev.real < 0
  ]
  return min(candidates, default=math.inf)


def discretize(
  cm: ContinuousModel,
  orbit: OrbitParams,
  p: int,
  cond_limit: Optional[float] = None,
) -> PeriodicDiscreteModel:
  """
  First-order discretization Ak = I + A*ts, Bk = B(k*ts)*ts.

  Args:
    cm: Continuous model
    orbit: Orbit the model was built for (sets ts = P/p)
    p: Samples per orbit
    cond_limit: Largest accepted condition number of Ak

  Returns:
    PeriodicDiscreteModel with p input matrices

  Raises:
    SingularAk: ts at or beyond the first sample time where I + s*A is
      singular, or Ak numerically singular
  """
  if p < 1:
    raise ConfigError(f"samples per orbit must be >= 1, got {p}")
  if orbit != cm.orbit:
    raise DimensionMismatch("orbit differs from the one the continuous model was built for")

  cond_limit = cond_limit or settings.SINGULAR_COND_LIMIT
  ts = orbital_period(orbit) / p
  n = cm.A.shape[0]

  s_first = first_singular_sample_time(cm)
  if ts >= s_first:
    raise SingularAk(
      f"sample time {ts:.4f} s is beyond {s_first:.4f} s, where I + ts*A "
      f"becomes singular; increase samples_per_orbit",
      detail={"ts": ts, "first_singular_ts": s_first, "p": p},
    )

  reduced = np.eye(3) + ts * cm.sigma1 - 0.5 * ts ** 2 * cm.lambda1
  det_reduced = float(np.linalg.det(reduced))
  if det_reduced <= 0:
    raise SingularAk(
      f"det(I + ts*Sigma1 - 0.5*ts^2*Lambda1) = {det_reduced:.3e} at ts = {ts:.4f} s",
      detail={"ts": ts, "det_reduced": det_reduced},
    )

  Ak = np.eye(n) + cm.A * ts
  cond = float(np.linalg.cond(Ak))
  if not np.isfinite(cond) or cond > cond_limit:
    raise SingularAk(
      f"Ak is numerically singular (condition number {cond:.3e})",
      detail={"ts": ts, "cond": cond},
    )

  Bk_list = tuple(cm.b_matrix(k * ts) * ts for k in range(p))

  logger.info(
    "Discrete model built",
    extra={"p": p, "ts": ts, "cond_Ak": cond, "det_reduced": det_reduced},
  )
  return PeriodicDiscreteModel(Ak=Ak, Bk_list=Bk_list, ts=ts)
