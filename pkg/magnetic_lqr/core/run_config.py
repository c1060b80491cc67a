"""
Run Configuration Schema

The per-run problem statement read from a YAML file: spacecraft, orbit,
discretization, weights, simulation, solver and output sections. Every
section rejects unknown keys; validation failures are reported as a single
ConfigError listing each failing field path.

Example:
    spacecraft:
      inertia: [250, 150, 100]
    orbit:
      altitude_m: 657000
      magnetic_inclination_deg: 57
    discretization:
      samples_per_orbit: 100
    weights:
      Q: [1.5e-9, 1.5e-9, 1.5e-9, 1.0e-3, 1.0e-3, 1.0e-3]
      R: [2.0e-3, 2.0e-3, 2.0e-3]
"""

import hashlib
import json
import math
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import ConfigError
from magnetic_lqr.services.dynamics.orbit import OrbitParams

MatrixSpec = Union[List[float], List[List[float]]]

STATE_DIM = 6
INPUT_DIM = 3

PROBLEM_SECTIONS = {"spacecraft", "orbit", "discretization", "weights"}


def matrix_from_spec(value, size: int) -> np.ndarray:
    """
    Expand a diagonal list or a full nested list into a size x size matrix.

    Raises:
        ValueError: the value has neither shape
    """
    arr = np.asarray(value, dtype=float)
    if arr.shape == (size,):
        return np.diag(arr)
    if arr.shape == (size, size):
        return arr
    raise ValueError(
        f"expected {size} diagonal entries or a {size}x{size} matrix, got shape {arr.shape}"
    )


def _check_matrix(value, size: int):
    if value is not None:
        matrix = matrix_from_spec(value, size)
        if not np.all(np.isfinite(matrix)):
            raise ValueError("entries must be finite")
    return value


# =============================================================================
# SECTIONS
# =============================================================================

class SpacecraftSection(BaseModel):
    """Spacecraft mass properties."""

    model_config = ConfigDict(extra="forbid")

    inertia: MatrixSpec = Field(..., description="Principal moments [J11, J22, J33] or a 3x3 matrix, kg*m^2")

    @field_validator("inertia")
    @classmethod
    def validate_inertia(cls, v):
        return _check_matrix(v, 3)


class OrbitSection(BaseModel):
    """Circular orbit relative to the magnetic equator."""

    model_config = ConfigDict(extra="forbid")

    altitude_m: float = Field(..., gt=0, description="Orbit altitude, m")
    magnetic_inclination_deg: float = Field(..., ge=0, le=180, description="Magnetic inclination, degrees")
    earth_radius_m: Optional[float] = Field(None, gt=0, description="Earth radius, m (defaults to the mean radius)")


class DiscretizationSection(BaseModel):
    """Sampling of one orbit."""

    model_config = ConfigDict(extra="forbid")

    samples_per_orbit: int = Field(..., ge=1, description="Samples per orbital period p")


class WeightsSection(BaseModel):
    """LQR weights; diagonal lists or full matrices."""

    model_config = ConfigDict(extra="forbid")

    Q: MatrixSpec
    R: MatrixSpec
    QN: Optional[MatrixSpec] = None
    assume_detectable: bool = False

    @field_validator("Q", "QN")
    @classmethod
    def validate_state_weights(cls, v):
        return _check_matrix(v, STATE_DIM)

    @field_validator("R")
    @classmethod
    def validate_input_weight(cls, v):
        return _check_matrix(v, INPUT_DIM)


class SimulationSection(BaseModel):
    """Closed-loop simulation settings."""

    model_config = ConfigDict(extra="forbid")

    x0: List[float] = Field(
        default=[0.01, 0.01, 0.01, 1e-5, 1e-5, 1e-5],
        description="Initial (q1, q2, q3, w1, w2, w3)",
    )
    num_orbits: int = Field(10, ge=1)
    moment_limit: Optional[float] = Field(None, gt=0, description="Dipole saturation, A*m^2")

    @field_validator("x0")
    @classmethod
    def validate_x0(cls, v: List[float]) -> List[float]:
        if len(v) != STATE_DIM:
            raise ValueError(f"x0 must have {STATE_DIM} entries, got {len(v)}")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("x0 entries must be finite")
        return v


class SolverSection(BaseModel):
    """Solver choice and optional overrides of the process tolerances."""

    model_config = ConfigDict(extra="forbid")

    tag: str = "gamma"
    unit_circle_tol: Optional[float] = Field(None, gt=0)
    oracle_periods: Optional[int] = Field(None, ge=1)
    convergence_tol: Optional[float] = Field(None, gt=0)
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("tag")
    @classmethod
    def validate_tag(cls, v: str) -> str:
        tag = v.strip().lower()
        if tag not in ("gamma", "pi", "eigen", "recursion"):
            raise ValueError("tag must be one of gamma, pi, eigen, recursion")
        return tag


class OutputSection(BaseModel):
    """Where results go."""

    model_config = ConfigDict(extra="forbid")

    directory: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    plots: bool = False


class RunConfig(BaseModel):
    """Complete problem statement for one design run."""

    model_config = ConfigDict(extra="forbid")

    spacecraft: SpacecraftSection
    orbit: OrbitSection
    discretization: DiscretizationSection
    weights: WeightsSection
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def inertia_matrix(self) -> np.ndarray:
        """3x3 inertia matrix."""
        return matrix_from_spec(self.spacecraft.inertia, 3)

    def state_weight(self) -> np.ndarray:
        return matrix_from_spec(self.weights.Q, STATE_DIM)

    def input_weight(self) -> np.ndarray:
        return matrix_from_spec(self.weights.R, INPUT_DIM)

    def terminal_weight(self) -> Optional[np.ndarray]:
        if self.weights.QN is None:
            return None
        return matrix_from_spec(self.weights.QN, STATE_DIM)

    @property
    def magnetic_inclination_rad(self) -> float:
        """The only place degrees become radians."""
        return math.radians(self.orbit.magnetic_inclination_deg)

    def orbit_params(self) -> OrbitParams:
        """Orbit section as model parameters, inclination in radians."""
        kwargs = {}
        if self.orbit.earth_radius_m is not None:
            kwargs["earth_radius_m"] = self.orbit.earth_radius_m
        return OrbitParams(
            altitude_m=self.orbit.altitude_m,
            magnetic_inclination_rad=self.magnetic_inclination_rad,
            **kwargs,
        )

    def canonical_json(self) -> str:
        """Sorted, whitespace-free JSON of the sections that define the plant and weights."""
        problem = self.model_dump(mode="json", include=PROBLEM_SECTIONS)
        return json.dumps(problem, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON; solver, simulation and output choices do not enter it."""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


# =============================================================================
# LOAD / DUMP
# =============================================================================

def _format_validation_error(exc: ValidationError) -> str:
    problems = []
    for err in exc.errors():
        path = ".".join(str(part) for part in err["loc"]) or "<root>"
        problems.append(f"{path}: {err['msg']}")
    return "; ".join(problems)


def parse_run_config(data) -> RunConfig:
    """
    Validate an already-parsed mapping.

    Raises:
        ConfigError: message lists every failing field path
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of sections")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        fields = [".".join(str(part) for part in err["loc"]) for err in exc.errors()]
        raise ConfigError(
            f"invalid config: {_format_validation_error(exc)}",
            detail={"fields": fields},
        ) from exc


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and validate a YAML run config.

    Raises:
        ConfigError: unreadable file, malformed YAML or invalid fields
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc

    return parse_run_config(data)


def dump_run_config(config: RunConfig, path: Optional[Union[str, Path]] = None) -> str:
    """
    Serialize a config to YAML, optionally writing it to `path`.

    Returns:
        The YAML text
    """
    text = yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
