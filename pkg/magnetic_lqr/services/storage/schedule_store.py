"""
Gain schedule persistence.

Schedules are stored as NumPy .npz archives: binary IEEE-754 doubles, so a
write/read round trip is exact. Header arrays (format_version, n, m, p,
ts, solver_tag, config_hash, inversions) sit next to the payload arrays
P (p x n x n) and K (p x m x n), both row-major.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from magnetic_lqr.core.exceptions import ConfigError, ScheduleMismatch
from magnetic_lqr.services.dynamics.spacecraft import PeriodicDiscreteModel
from magnetic_lqr.services.riccati.schedule import GainSchedule, SolverTag

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_KEYS = ("format_version", "n", "m", "p", "ts", "solver_tag", "config_hash", "inversions")


@dataclass(frozen=True)
class ScheduleHeader:
  """Self-description stored with every schedule file."""
  format_version: int
  n: int
  m: int
  p: int
  ts: float
  solver_tag: str
  config_hash: str
  inversions: int

  def to_dict(self) -> dict:
    return asdict(self)


def _npz_path(path: Union[str, Path]) -> Path:
  path = Path(path)
  return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def save_schedule(
  path: Union[str, Path], schedule: GainSchedule, config_hash: str
) -> Path:
  """
  Write a schedule and its header.

  Returns:
    Path actually written (".npz" is appended when missing)
  """
  path = _npz_path(path)
  path.parent.mkdir(parents=True, exist_ok=True)

  np.savez(
    path,
    format_version=np.array(FORMAT_VERSION),
    n=np.array(schedule.n),
    m=np.array(schedule.m),
    p=np.array(schedule.p),
    ts=np.array(schedule.ts),
    solver_tag=np.array(schedule.solver_tag.value),
    config_hash=np.array(config_hash),
    inversions=np.array(schedule.inversions),
    P=np.stack(schedule.P_list),
    K=np.stack(schedule.K_list),
  )
  logger.info(
    "Schedule saved",
    extra={"path": str(path), "p": schedule.p, "solver": schedule.solver_tag.value},
  )
  return path


def load_schedule(path: Union[str, Path]) -> Tuple[GainSchedule, ScheduleHeader]:
  """
  Read a schedule written by save_schedule.

  Raises:
    ConfigError: file missing, unreadable or lacking required arrays
    ScheduleMismatch: unsupported format version, unknown solver tag or payload/header disagreement
  """
  path = Path(path)
  try:
    with np.load(path, allow_pickle=False) as archive:
      missing = [key for key in HEADER_KEYS + ("P", "K") if key not in archive.files]
      if missing:
        raise ConfigError(f"schedule file {path} lacks arrays {missing}")
      header = ScheduleHeader(
        format_version=int(archive["format_version"]),
        n=int(archive["n"]),
        m=int(archive["m"]),
        p=int(archive["p"]),
        ts=float(archive["ts"]),
        solver_tag=str(archive["solver_tag"]),
        config_hash=str(archive["config_hash"]),
        inversions=int(archive["inversions"]),
      )
      P = np.array(archive["P"])
      K = np.array(archive["K"])
  except ConfigError:
    raise
  except (OSError, ValueError) as exc:
    raise ConfigError(f"cannot read schedule {path}: {exc}") from exc

  if header.format_version != FORMAT_VERSION:
    raise ScheduleMismatch(
      f"schedule format version {header.format_version} is not supported (expected {FORMAT_VERSION})"
    )
  if P.shape != (header.p, header.n, header.n) or K.shape != (header.p, header.m, header.n):
    raise ScheduleMismatch(
      f"payload shapes P{P.shape}, K{K.shape} disagree with header (p={header.p}, n={header.n}, m={header.m})"
    )

  try:
    solver_tag = SolverTag(header.solver_tag)
  except ValueError as exc:
    raise ScheduleMismatch(f"schedule solver tag {header.solver_tag!r} is not recognized") from exc

  schedule = GainSchedule(
    P_list=tuple(P),
    K_list=tuple(K),
    ts=header.ts,
    solver_tag=solver_tag,
    inversions=header.inversions,
  )
  return schedule, header


def check_schedule_matches(
  header: ScheduleHeader, pm: PeriodicDiscreteModel, config_hash: str
) -> None:
  """
  Raise ScheduleMismatch unless the header describes this plant and config.
  """
  problems = []
  for name, expected in (("n", pm.n), ("m", pm.m), ("p", pm.p)):
    if getattr(header, name) != expected:
      problems.append(f"{name}: file {getattr(header, name)}, config {expected}")
  if not np.isclose(header.ts, pm.ts, rtol=1e-12, atol=0.0):
    problems.append(f"ts: file {header.ts}, config {pm.ts}")
  if header.config_hash != config_hash:
    problems.append("config_hash differs")

  if problems:
    raise ScheduleMismatch(
      "schedule does not match config: " + "; ".join(problems),
      detail={"problems": problems},
    )
