"""
Circular Orbit and Dipole Field Model

Orbital period/rate of a circular orbit and the tilted-dipole approximation
of the geomagnetic field seen along it. Time t = 0 is the ascending-node
crossing of the magnetic equator.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from magnetic_lqr.core.exceptions import ConfigError

# Earth gravitational parameter, m^3/s^2
GM_EARTH = 3.986005e14
# Dipole strength of the geomagnetic field, Wb*m
MU_F = 7.9e15
# Mean Earth radius, m
EARTH_RADIUS_M = 6.371e6


@dataclass(frozen=True)
class OrbitParams:
  """
  Circular orbit relative to the magnetic equator.
  """
  altitude_m: float
  magnetic_inclination_rad: float
  earth_radius_m: float = EARTH_RADIUS_M
  gm: float = GM_EARTH
  mu_f: float = MU_F

  def __post_init__(self) -> None:
    if not self.altitude_m > 0:
      raise ConfigError(f"altitude_m must be > 0, got {self.altitude_m}")
    if not 0.0 <= self.magnetic_inclination_rad <= math.pi:
      raise ConfigError(
        f"magnetic_inclination_rad must lie in [0, pi], got {self.magnetic_inclination_rad}"
      )
    if not self.earth_radius_m > 0:
      raise ConfigError(f"earth_radius_m must be > 0, got {self.earth_radius_m}")
    if not self.gm > 0 or not self.mu_f > 0:
      raise ConfigError("gm and mu_f must be positive")

  @property
  def radius_m(self) -> float:
    """Orbital radius a."""
    return self.earth_radius_m + self.altitude_m

  @property
  def field_scale(self) -> float:
    """Dipole field magnitude mu_f / a^3, tesla."""
    return self.mu_f / self.radius_m ** 3

  def to_dict(self) -> dict:
    """Convert to dictionary representation."""
    return {
      "altitude_m": self.altitude_m,
      "magnetic_inclination_rad": self.magnetic_inclination_rad,
      "earth_radius_m": self.earth_radius_m,
      "radius_m": self.radius_m,
      "orbital_period_s": orbital_period(self),
      "orbital_rate_rad_s": orbital_rate(self),
    }


def orbital_period(orbit: OrbitParams) -> float:
  """
  Period of the circular orbit, 2*pi*sqrt(a^3/GM), in seconds.
  """
  return 2.0 * math.pi * math.sqrt(orbit.radius_m ** 3 / orbit.gm)


def orbital_rate(orbit: OrbitParams) -> float:
  """
  Orbit (and LVLH frame) rate omega0 = 2*pi/P, rad/s.
  """
  return 2.0 * math.pi / orbital_period(orbit)


def magnetic_field(orbit: OrbitParams, t: Union[float, np.ndarray]) -> np.ndarray:
  """
  Dipole field in the orbit frame at time(s) t.

  Args:
    orbit: Orbit parameters
    t: Time in seconds since the ascending-node crossing, scalar or 1-D array

  Returns:
    Field vector [b1, b2, b3] in tesla, shape (3,) for scalar t or (len(t), 3)
  """
  t_arr = np.asarray(t, dtype=float)
  if np.any(t_arr < 0):
    raise ValueError("t must be >= 0")

  phase = orbital_rate(orbit) * t_arr
  s_i = math.sin(orbit.magnetic_inclination_rad)
  c_i = math.cos(orbit.magnetic_inclination_rad)

  field = orbit.field_scale * np.stack(
    [
      np.cos(phase) * s_i,
      np.full_like(phase, -c_i),
      2.0 * np.sin(phase) * s_i,
    ],
    axis=-1,
  )
  return field
