"""JSON Lines persistence for trajectories.

One TrajectoryRecord per line, in node order. Floats are written in their
shortest round-trip form, so a write/read cycle reproduces every stored value.
"""

from pathlib import Path

import numpy as np

from ..core.symmat import sym_eig
from ..models.trajectory import Trajectory, TrajectoryRecord
from ..utils.logger import logger


def trajectory_to_records(traj: Trajectory) -> list[TrajectoryRecord]:
    """Flatten a trajectory into one record per grid node."""
    omega = traj.omega.ravel().tolist()
    return [
        TrajectoryRecord(
            t=float(traj.times[k]),
            sigma=traj.sigmas[k].ravel().tolist(),
            a=traj.controls[k].ravel().tolist(),
            m=traj.momenta[k].ravel().tolist(),
            omega=omega,
            eigs_a=traj.eigs_a[k].tolist(),
            det_sigma=float(traj.det_sigma[k]),
            g_theta=float(traj.g_theta[k]),
            theta=traj.theta,
        )
        for k in range(traj.times.size)
    ]


def records_to_trajectory(records: list[TrajectoryRecord]) -> Trajectory:
    """Rebuild a trajectory from stored records.

    Eigenvalues of M are recomputed from the stored momenta; Omega is taken
    from the first record.

    Raises:
        ValueError: If the records are empty, mix dimensions or do not span [0, 1]
    """
    if not records:
        raise ValueError("no records to rebuild a trajectory from")
    dims = {r.dim for r in records}
    if len(dims) != 1:
        raise ValueError(f"records mix dimensions {sorted(dims)}")

    momenta = np.array([r.matrix("m") for r in records])
    return Trajectory(
        times=[r.t for r in records],
        sigmas=np.array([r.matrix("sigma") for r in records]),
        momenta=momenta,
        omega=records[0].matrix("omega"),
        controls=np.array([r.matrix("a") for r in records]),
        det_sigma=[r.det_sigma for r in records],
        g_theta=[r.g_theta for r in records],
        eigs_a=[r.eigs_a for r in records],
        eigs_m=[sym_eig(0.5 * (m + m.T)).values for m in momenta],
        theta=records[0].theta,
    )


def write_records(path: str | Path, traj: Trajectory) -> Path:
    """Write a trajectory as JSON Lines.

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in trajectory_to_records(traj):
            fh.write(record.model_dump_json() + "\n")
    logger.info(f"Wrote {traj.times.size} trajectory records to {path}")
    return path


def read_records(path: str | Path) -> list[TrajectoryRecord]:
    """Read a JSON Lines trajectory file.

    Raises:
        FileNotFoundError: If the file does not exist
        pydantic.ValidationError: If a line is not a valid record
    """
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(TrajectoryRecord.model_validate_json(line))
    logger.debug(f"Read {len(records)} trajectory records from {path}")
    return records
