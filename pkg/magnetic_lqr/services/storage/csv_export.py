"""
CSV export of trajectories and field samples.

Values are written with repr(), the shortest text that reads back to the
same double.
"""

import csv
from pathlib import Path
from typing import Union

import numpy as np

from magnetic_lqr.core.exceptions import DimensionMismatch
from magnetic_lqr.services.simulation.closed_loop import Trajectory

TRAJECTORY_COLUMNS = ["t_s", "q1", "q2", "q3", "w1", "w2", "w3", "m1", "m2", "m3"]
FIELD_COLUMNS = ["t_s", "b1_T", "b2_T", "b3_T"]


def _cell(value: float) -> str:
  return repr(float(value))


def write_trajectory_csv(trajectory: Trajectory, path: Union[str, Path]) -> Path:
  """
  One row per state sample; the last row has empty moment cells since no
  moment follows the final state.
  """
  if trajectory.states.shape[1] != 6 or trajectory.moments.shape[1] != 3:
    raise DimensionMismatch("trajectory CSV needs 6 states and 3 moments")

  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  with open(path, "w", newline="", encoding="utf-8") as f:
    writer = csv.writer(f)
    writer.writerow(TRAJECTORY_COLUMNS)
    for k, (t, x) in enumerate(zip(trajectory.times, trajectory.states)):
      row = [_cell(t)] + [_cell(v) for v in x]
      if k < trajectory.num_steps:
        row += [_cell(v) for v in trajectory.moments[k]]
      else:
        row += ["", "", ""]
      writer.writerow(row)
  return path


def write_field_csv(times: np.ndarray, field: np.ndarray, path: Union[str, Path]) -> Path:
  """Rows of t and the three field components in tesla."""
  times = np.asarray(times, dtype=float)
  field = np.asarray(field, dtype=float)
  if field.shape != (times.shape[0], 3):
    raise DimensionMismatch(f"field must be {times.shape[0]}x3, got {field.shape}")

  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  with open(path, "w", newline="", encoding="utf-8") as f:
    writer = csv.writer(f)
    writer.writerow(FIELD_COLUMNS)
    for t, b in zip(times, field):
      writer.writerow([_cell(t)] + [_cell(v) for v in b])
  return path
