"""
Application Configuration Management

Loads and validates process-wide settings using Pydantic Settings.
Numerical tolerances, oracle limits, logging and output defaults live here;
the per-run problem statement (spacecraft, orbit, weights) lives in
``magnetic_lqr.core.run_config``.
"""

import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Process settings loaded from environment variables.

    All settings have defaults that reproduce the 657 km design example.
    Override via environment or a local .env file.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # =========================================================================
    # APPLICATION SETTINGS
    # =========================================================================
    APP_NAME: str = "Magnetic LQR"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # =========================================================================
    # LOGGING
    # =========================================================================
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "text"
    LOG_FILE: Optional[str] = None

    # =========================================================================
    # NUMERICS
    # =========================================================================
    UNIT_CIRCLE_TOL: float = Field(
        default=1e-7,
        description="Required margin |log|lambda|| for the symplectic dichotomy",
    )
    SYMPLECTIC_TOL: float = 1e-8
    HAMILTONIAN_TOL: float = 1e-10
    SINGULAR_COND_LIMIT: float = 1e14
    EIGEN_DISTINCT_TOL: float = 1e-10
    EIGEN_IMAG_TOL: float = 1e-8
    LOG_FACTOR_NORMS: bool = False
    RICCATI_REFINEMENT_STEPS: int = Field(
        default=3,
        description="Newton steps applied after a subspace solve (0 disables)",
    )

    # =========================================================================
    # BACKWARD RECURSION ORACLE
    # =========================================================================
    ORACLE_PERIODS: int = 60
    ORACLE_CONVERGENCE_TOL: float = 1e-9

    # =========================================================================
    # EXECUTION
    # =========================================================================
    SOLVER_WORKERS: int = 1

    # =========================================================================
    # OUTPUT
    # =========================================================================
    OUTPUT_DIR: str = "./out"
    SCHEDULE_FILENAME: str = "schedule.npz"

    # =========================================================================
    # VALIDATORS
    # =========================================================================

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Reject level names the logging module does not know."""
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown LOG_LEVEL: {v}")
        return level

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Only json and text formatters exist."""
        fmt = v.lower()
        if fmt not in ("json", "text"):
            raise ValueError("LOG_FORMAT must be 'json' or 'text'")
        return fmt

    @field_validator(
        "UNIT_CIRCLE_TOL",
        "SYMPLECTIC_TOL",
        "HAMILTONIAN_TOL",
        "SINGULAR_COND_LIMIT",
        "EIGEN_DISTINCT_TOL",
        "EIGEN_IMAG_TOL",
        "ORACLE_CONVERGENCE_TOL",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances and limits must be strictly positive."""
        if v <= 0:
            raise ValueError("must be > 0")
        return v

    @field_validator("RICCATI_REFINEMENT_STEPS")
    @classmethod
    def validate_refinement_steps(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("ORACLE_PERIODS", "SOLVER_WORKERS")
    @classmethod
    def validate_count(cls, v: int) -> int:
        """Counts start at one."""
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    # =========================================================================
    # COMPUTED PROPERTIES
    # =========================================================================

    @property
    def oracle_config(self) -> dict:
        """Get backward recursion oracle defaults."""
        return {
            "num_periods": self.ORACLE_PERIODS,
            "convergence_tol": self.ORACLE_CONVERGENCE_TOL,
        }


# Global settings instance
settings = Settings()
