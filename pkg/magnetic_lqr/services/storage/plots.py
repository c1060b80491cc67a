"""
Static response plots, one PNG per state plus one for the dipole moments.
"""

from pathlib import Path
from typing import List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from magnetic_lqr.services.simulation.closed_loop import Trajectory  # noqa: E402

STATE_LABELS = [
  ("q1", "q1 [-]"),
  ("q2", "q2 [-]"),
  ("q3", "q3 [-]"),
  ("w1", "w1 [rad/s]"),
  ("w2", "w2 [rad/s]"),
  ("w3", "w3 [rad/s]"),
]


def plot_trajectory(trajectory: Trajectory, directory: Union[str, Path], dpi: int = 150) -> List[Path]:
  """
  Render the closed-loop response.

  Returns:
    Paths of the written files
  """
  directory = Path(directory)
  directory.mkdir(parents=True, exist_ok=True)
  written = []

  for i, (name, label) in enumerate(STATE_LABELS):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(trajectory.times, trajectory.states[:, i], linewidth=1.2)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(label)
    ax.grid(True, alpha=0.3)
    path = directory / f"state_{name}.png"
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

  fig, ax = plt.subplots(figsize=(7, 3.5))
  for j in range(trajectory.moments.shape[1]):
    ax.step(trajectory.times[:-1], trajectory.moments[:, j], where="post", label=f"m{j + 1}")
  ax.set_xlabel("time [s]")
  ax.set_ylabel("dipole moment [A m^2]")
  ax.legend()
  ax.grid(True, alpha=0.3)
  path = directory / "moments.png"
  fig.savefig(path, dpi=dpi, bbox_inches="tight")
  plt.close(fig)
  written.append(path)

  return written
