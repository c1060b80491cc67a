"""
Error hierarchy for the design pipeline.

Every error carries the process exit code the CLI returns for it:
1 for usage/configuration problems, 2 for numerical failures
(singularity, lost dichotomy, non-convergence), 3 for a failed check suite.
"""

from typing import Optional


class MagneticLQRError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1

    def __init__(self, message: str, *, detail: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def to_dict(self) -> dict:
        """Convert to dictionary representation for reports."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "detail": self.detail,
        }


# =============================================================================
# CONFIGURATION / USAGE (exit 1)
# =============================================================================

class ConfigError(MagneticLQRError, ValueError):
    """Config file could not be read or does not validate."""

    exit_code = 1


class ScheduleMismatch(ConfigError):
    """Persisted schedule header disagrees with the config it is used with."""


class NonPrincipalInertia(ConfigError):
    """Inertia matrix has off-diagonal products of inertia."""


class DetectabilityNotAsserted(ConfigError):
    """Q is only semi-definite and the user did not assert detectability."""


# =============================================================================
# NUMERICAL FAILURES (exit 2)
# =============================================================================

class NumericalError(MagneticLQRError):
    """A numerical precondition failed during design or simulation."""

    exit_code = 2


class SingularA(NumericalError):
    """Two principal moments of inertia coincide, so A is singular."""


class SingularAk(NumericalError):
    """The discrete state matrix is singular at the chosen sample time."""


class OddDimension(NumericalError, ValueError):
    """A structured 2n x 2n matrix was expected."""


class SingularInput(NumericalError):
    """Input matrix is numerically singular."""


class IndefiniteR(NumericalError, ValueError):
    """Input weight is not symmetric positive definite."""


class NegativeQ(NumericalError, ValueError):
    """State weight is not symmetric positive semi-definite."""


class IndexOutOfRange(NumericalError, IndexError):
    """Period index outside 0..p-1."""


class SingularEk(NumericalError):
    """A pencil factor E_k could not be inverted."""


class UnitCircleEigenvalue(NumericalError):
    """Symplectic dichotomy failed: an eigenvalue sits on the unit circle."""


class SingularU11(NumericalError):
    """Stable-subspace basis block is singular (time-invariant solve)."""


class SingularW11(NumericalError):
    """Schur basis block W11 is singular (periodic solve)."""


class SingularV11(NumericalError):
    """Eigenvector basis block V11 is singular."""


class DefectiveMatrix(NumericalError):
    """Eigenvalues are not distinct, eigenvector path is not applicable."""


class DimensionMismatch(NumericalError, ValueError):
    """Operands have incompatible shapes or periods."""


class NotConverged(NumericalError):
    """Backward recursion did not settle within the allotted periods."""

    def __init__(self, num_periods: int, achieved: float):
        super().__init__(
            f"Backward recursion not converged after {num_periods} periods "
            f"(last relative change {achieved:.3e})",
            detail={"num_periods": num_periods, "achieved": achieved},
        )
        self.num_periods = num_periods
        self.achieved = achieved


# =============================================================================
# CHECK SUITE (exit 3)
# =============================================================================

class CheckFailed(MagneticLQRError):
    """At least one invariant check failed."""

    exit_code = 3
